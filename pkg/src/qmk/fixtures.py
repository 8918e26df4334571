"""Standard charts and fields used by the tests and the sample documents."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction
from typing import Dict, Mapping, Sequence, Tuple

from .graded_algebra import EVEN, ODD, Coordinate, GradedContext, Polynomial
from .vector_fields import CoordinateChange, VectorField, is_homological, pushforward_basis_field


def lie_algebroid_field(
    ctx: GradedContext,
    fibers: Sequence[str],
    constants: Mapping[Tuple[int, int], Mapping[int, object]],
    anchors: Sequence[Mapping[str, Polynomial]] = (),
) -> VectorField:
    """``xi^i rho_i + 1/2 xi^i xi^j c^k_ji d/dxi^k`` for a Lie algebroid with
    ``[e_i, e_j] = c^k_ij e_k`` and anchor ``rho_i``.

    ``constants[(i, j)]`` gives ``{k: c^k_ij}`` for ``i < j``; antisymmetry
    fills in the rest.
    """
    xi = [ctx.var(n) for n in fibers]
    comps: Dict[str, Polynomial] = {}
    full = {}
    for (i, j), row in constants.items():
        for k, c in row.items():
            full[(i, j, k)] = Fraction(c)
            full[(j, i, k)] = -Fraction(c)
    for (i, j, k), c in full.items():
        # c = c^k_ij multiplies 1/2 xi^j xi^i
        term = Fraction(1, 2) * c * (xi[j] * xi[i])
        comps[fibers[k]] = comps.get(fibers[k], ctx.zero) + term
    for i, rho in enumerate(anchors):
        for a, coeff in rho.items():
            comps[a] = comps.get(a, ctx.zero) + xi[i] * coeff
    return VectorField(ctx, comps)


def tangent_algebroid() -> VectorField:
    ctx = GradedContext.of(("x", EVEN, 0), ("xi", ODD, 1))
    return VectorField(ctx, {"x": ctx.var("xi")})


def nonabelian_2d(c: int = 1) -> VectorField:
    """Chevalley-Eilenberg field of ``[e1, e2] = c e1``."""
    ctx = GradedContext.of(("xi1", ODD, 1), ("xi2", ODD, 1))
    return lie_algebroid_field(ctx, ["xi1", "xi2"], {(0, 1): {0: c}})


def so3() -> VectorField:
    ctx = GradedContext.of(("xi1", ODD, 1), ("xi2", ODD, 1), ("xi3", ODD, 1))
    return lie_algebroid_field(
        ctx, ["xi1", "xi2", "xi3"], {(0, 1): {2: 1}, (1, 2): {0: 1}, (2, 0): {1: 1}}
    )


def corrupted_lie_algebra() -> VectorField:
    """Bracket ``[e1, e2] = e2, [e2, e3] = e1``: the Jacobi identity fails."""
    ctx = GradedContext.of(("xi1", ODD, 1), ("xi2", ODD, 1), ("xi3", ODD, 1))
    return lie_algebroid_field(ctx, ["xi1", "xi2", "xi3"], {(0, 1): {1: 1}, (1, 2): {0: 1}})


def abelian_chart() -> VectorField:
    ctx = GradedContext.of(("x", EVEN, 0), ("xi1", ODD, 1), ("xi2", ODD, 1))
    return VectorField(ctx)


def affine_line_algebroid() -> VectorField:
    """Action algebroid of ``span(d/dx, x d/dx)`` on the line."""
    ctx = GradedContext.of(("x", EVEN, 0), ("xi1", ODD, 1), ("xi2", ODD, 1))
    x = ctx.var("x")
    return lie_algebroid_field(
        ctx, ["xi1", "xi2"], {(0, 1): {0: 1}}, [{"x": ctx.one}, {"x": x}]
    )


def sl2_line_algebroid() -> VectorField:
    """Action algebroid of sl2 acting on the line by ``d, -2x d, -x^2 d``."""
    ctx = GradedContext.of(("x", EVEN, 0), ("xe", ODD, 1), ("xh", ODD, 1), ("xf", ODD, 1))
    x = ctx.var("x")
    # [h, e] = 2e, [h, f] = -2f, [e, f] = h with e = 0, h = 1, f = 2
    return lie_algebroid_field(
        ctx,
        ["xe", "xh", "xf"],
        {(1, 0): {0: 2}, (1, 2): {2: -2}, (0, 2): {1: 1}},
        [{"x": ctx.one}, {"x": -2 * x}, {"x": -(x * x)}],
    )


def broken_anchor_algebroid() -> VectorField:
    """Zero bracket with anchors ``d/dx1`` and ``x1 d/dx2``: not a homomorphism."""
    ctx = GradedContext.of(("x1", EVEN, 0), ("x2", EVEN, 0), ("xi1", ODD, 1), ("xi2", ODD, 1))
    xi1, xi2, x1 = ctx.vars("xi1", "xi2", "x1")
    return VectorField(ctx, {"x1": xi1, "x2": xi2 * x1})


def toy_model() -> VectorField:
    """``z d/dy`` with ``y`` odd of weight 1 and ``z`` even of weight 2."""
    ctx = GradedContext.of(("y", ODD, 1), ("z", EVEN, 2))
    return VectorField(ctx, {"y": ctx.var("z")})


def non_homological_toy() -> VectorField:
    """``z d/dy + y z d/dz``: odd of weight 1 with ``[Q, Q] != 0``."""
    ctx = GradedContext.of(("y", ODD, 1), ("z", EVEN, 2))
    y, z = ctx.vars("y", "z")
    return VectorField(ctx, {"y": z, "z": y * z})


def mixed_chart() -> VectorField:
    """A degree-2 chart over a one-dimensional base.

    Start from the affine-line action algebroid plus ``deta d/deta``, then
    change coordinates by ``deta -> deta + x*eta*xi1``.
    """
    ctx = GradedContext.of(
        ("x", EVEN, 0), ("xi1", ODD, 1), ("xi2", ODD, 1), ("eta", EVEN, 1), ("deta", ODD, 2)
    )
    x, xi1, xi2, eta, deta = ctx.vars("x", "xi1", "xi2", "eta", "deta")
    base = lie_algebroid_field(ctx, ["xi1", "xi2"], {(0, 1): {0: 1}}, [{"x": ctx.one}, {"x": x}])
    Q0 = base + VectorField(ctx, {"eta": deta})
    ident = {c.name: ctx.var(c.name) for c in ctx}
    old_in_new = dict(ident, deta=deta + x * eta * xi1)
    new_in_old = dict(ident, deta=deta - x * eta * xi1)
    # Q0 lives on the old chart; express it on the new one.
    change = CoordinateChange(ctx, ctx, new_in_old, old_in_new)
    return pushforward_basis_field(Q0, change)


def _model_monomials(ys, zs, ctx):
    """Weight-(w(c)+1) monomials for each target of the model chart."""
    out = {}
    yidx = list(ys)
    for k in ys:
        ms = [(z,) for z in zs]
        ms += [p for p in itertools.combinations_with_replacement(yidx, 2)
               if not (p[0] == p[1] and ctx[p[0]].parity == ODD)]
        out[k] = ms
    for lam in zs:
        ms = [(y, z) for y in ys for z in zs]
        ms += [t for t in itertools.combinations_with_replacement(yidx, 3)
               if all(t.count(v) <= 1 or ctx[v].parity == EVEN for v in set(t))]
        out[lam] = ms
    return out


def model_example(
    y_parities: Sequence[int] = (ODD, ODD, ODD),
    z_parities: Sequence[int] = (EVEN, EVEN),
    homological: bool = False,
) -> VectorField:
    """The general weight-1 field on a chart of weight-1 ``y``'s and weight-2 ``z``'s.

    Each coefficient is a formal weight-0 scalar named
    ``Q_<target>_<monomial>``, e.g. ``Q_y3_y1y2`` or ``Q_z1_y2z1``.

    With ``homological=True`` the field is ``eps * X`` for the general even
    weight-1 field ``X`` and an odd scalar ``eps``; then ``[Q, Q] = 0`` holds
    identically in the remaining symbols.
    """
    ys = [f"y{i + 1}" for i in range(len(y_parities))]
    zs = [f"z{i + 1}" for i in range(len(z_parities))]
    coords = [Coordinate(n, p, 1) for n, p in zip(ys, y_parities)]
    coords += [Coordinate(n, p, 2) for n, p in zip(zs, z_parities)]
    chart = GradedContext(coords)
    monos = _model_monomials(ys, zs, chart)
    field_parity = EVEN if homological else ODD
    symbols = []
    for target, ms in monos.items():
        for m in ms:
            mp = sum(chart[v].parity for v in m) & 1
            p = (field_parity + chart[target].parity + mp) & 1
            symbols.append((f"Q_{target}_{''.join(m)}", p, target, m))
    extra = [Coordinate("eps", ODD, 0)] if homological else []
    ctx = chart.extend(extra + [Coordinate(s, p, 0) for s, p, _, _ in symbols])
    comps: Dict[str, Polynomial] = {}
    for s, _, target, m in symbols:
        term = ctx.var(s)
        for v in m:
            term = term * ctx.var(v)
        if homological:
            term = ctx.var("eps") * term
        comps[target] = comps.get(target, ctx.zero) + term
    return VectorField(ctx, comps)


def dg_pair(ctx_specs=(("u", EVEN, 1), ("w", ODD, 2))) -> VectorField:
    """``w d/du`` with ``p(w) = p(u) + 1``."""
    ctx = GradedContext.of(*ctx_specs)
    return VectorField(ctx, {ctx_specs[0][0]: ctx.var(ctx_specs[1][0])})


def degree3_chart() -> VectorField:
    """A degree-3 chart where ``[du, dv]`` is nonzero for some basis pair.

    On degree-2 charts that commutator vanishes, so this is the smallest
    fixture that exercises the last term of the ``d{u,v}`` identity.
    """
    ctx = GradedContext.of(("c0", ODD, 1), ("c1", ODD, 2), ("c2", EVEN, 2), ("c3", EVEN, 3))
    c0, c1, c2, c3 = ctx.vars("c0", "c1", "c2", "c3")
    return VectorField(ctx, {"c1": c0 * c1, "c3": c0 * c3 + c1 * c2})


def random_unipotent_change(rng: random.Random, ctx: GradedContext, terms: int = 2):
    """Random weight-preserving change ``c -> c + (lower terms)`` with polynomial
    inverse. Returns ``(new_in_old, old_in_new)`` for use with
    :class:`CoordinateChange`."""
    from .derived_structure import _monomials_below

    order = sorted(range(len(ctx)), key=lambda i: ctx.weights[i])
    base = [i for i in range(len(ctx)) if ctx.weights[i] == 0]
    fwd = {c.name: ctx.var(c.name) for c in ctx}
    for pos, i in enumerate(order):
        c = ctx[i]
        if c.weight <= 0:
            continue
        earlier = [j for j in order[:pos] if ctx.weights[j] > 0 and ctx.weights[j] <= c.weight]
        cands = []
        for m in _monomials_below(ctx, earlier, c.weight + 1):
            if ctx.mono_weight(m) == c.weight and m != ((i, 1),):
                cands.append(m)
        add = ctx.zero
        for _ in range(terms):
            if not cands:
                break
            m = rng.choice(cands)
            mono = Polynomial._raw(ctx, {m: Fraction(1)})
            coeff = ctx.const(rng.randint(-2, 2))
            if base and rng.random() < 0.5:
                coeff = coeff * ctx.var(ctx[rng.choice(base)].name)
            t = coeff * mono
            if t and t.parity == c.parity:
                add = add + t
        fwd[c.name] = fwd[c.name] + add
    # invert the triangular substitution by successive correction
    inv = {c.name: ctx.var(c.name) for c in ctx}
    for _ in range(max(ctx.weights, default=0) + 2):
        new_inv = {}
        for c in ctx:
            correction = fwd[c.name] - ctx.var(c.name)
            new_inv[c.name] = ctx.var(c.name) - correction.substitute(inv, ctx)
        inv = new_inv
    return fwd, inv


def random_homological(rng: random.Random) -> VectorField:
    """A homological weight-1 field from a curated family, in random coordinates."""
    family = rng.choice([
        tangent_algebroid, nonabelian_2d, affine_line_algebroid, sl2_line_algebroid,
        toy_model, mixed_chart, so3, degree3_chart,
    ])
    Q = family()
    ctx = Q.context
    fwd, inv = random_unipotent_change(rng, ctx)
    change = CoordinateChange(ctx, ctx, fwd, inv)
    Q2 = pushforward_basis_field(Q, change)
    assert is_homological(Q2)
    return Q2


STANDARD = {
    "tangent": tangent_algebroid,
    "nonabelian2": nonabelian_2d,
    "abelian": abelian_chart,
    "so3": so3,
    "affine_line": affine_line_algebroid,
    "sl2_line": sl2_line_algebroid,
    "toy": toy_model,
    "mixed": mixed_chart,
    "degree3": degree3_chart,
    "model_homological": lambda: model_example(homological=True),
}
