"""Derived operations of a weight-one homological vector field.

For a non-negatively graded chart with an odd field ``Q`` of weight +1 the
negative-weight vector fields carry, besides the commutator, the operations

    d u      = P[Q, u]
    {u, v}   = [[Q, u], v]
    a(u) f   = [[Q, u], f]

where ``P`` keeps the negative-weight part. This module computes them,
checks the identities they satisfy, tabulates them on the canonical module
basis of negative fields, and rebuilds ``Q`` from those tables through the
induced L-infinity brackets on the quotient by fields vanishing at the origin.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .graded_algebra import (
    EVEN,
    ODD,
    GradedAlgebraError,
    GradedContext,
    Monomial,
    Polynomial,
    partial_derivative,
)
from .vector_fields import (
    VectorField,
    VectorFieldError,
    apply,
    commutator,
    homogeneous_parity,
    is_homological,
    negative_part,
)

LinComb = Dict[int, Polynomial]


class DerivedStructureError(VectorFieldError):
    pass


class NotNegative(DerivedStructureError):
    pass


class InconsistentTables(DerivedStructureError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


def _sign(n: int) -> int:
    return -1 if n & 1 else 1


class HigherAlgebroid:
    """A non-negatively graded chart with an odd weight-one field ``Q``.

    ``require_homological=False`` admits fields with ``[Q, Q] != 0``; the
    derived operations and their tables are still defined, only the
    identities that need ``Q^2 = 0`` fail.
    """

    def __init__(self, Q: VectorField, require_homological: bool = True, name: str = "Q"):
        ctx = Q.context
        if any(w < 0 for w in ctx.weights):
            raise DerivedStructureError("coordinates of negative weight are not allowed")
        if Q:
            if homogeneous_parity(Q) != ODD:
                raise DerivedStructureError("Q must be odd")
            if Q.weight != 1:
                raise DerivedStructureError("Q must be homogeneous of weight 1")
        self.Q = Q
        self.context = ctx
        self.name = name
        self.homological = bool(is_homological(Q))
        if require_homological and not self.homological:
            raise DerivedStructureError("Q is not homological")
        self._basis = None

    @property
    def basis(self) -> "NegativeBasis":
        if self._basis is None:
            self._basis = NegativeBasis(self.context)
        return self._basis

    @property
    def base_coordinates(self) -> List[str]:
        return [c.name for c in self.context if c.weight == 0]

    def __repr__(self):
        return f"HigherAlgebroid({self.name} = {self.Q})"


def _negative(u: VectorField, what="u"):
    if any(n >= 0 for n in u.weights()):
        raise NotNegative(f"{what} must have negative weight, got {u}")
    homogeneous_parity(u)


def big_D(A: HigherAlgebroid, u: VectorField) -> VectorField:
    return commutator(A.Q, u)


def derived_d(A: HigherAlgebroid, u: VectorField) -> VectorField:
    _negative(u)
    return negative_part(commutator(A.Q, u))


def derived_bracket2(A: HigherAlgebroid, u: VectorField, v: VectorField) -> VectorField:
    _negative(u)
    _negative(v, "v")
    return commutator(commutator(A.Q, u), v)


def higher_derived_bracket(A: HigherAlgebroid, *us: VectorField) -> VectorField:
    """``P[...[[Q, u1], u2], ..., uk]`` for ``k >= 1``."""
    if not us:
        raise DerivedStructureError("the 0-ary bracket is not exposed")
    for u in us:
        _negative(u)
    if len(us) == 1:
        return derived_d(A, us[0])
    result = commutator(commutator(A.Q, us[0]), us[1])
    for u in us[2:]:
        result = commutator(result, u)
    return negative_part(result)


# -- anchors --------------------------------------------------------------


def anchor_geometric(A: HigherAlgebroid) -> Dict[Tuple[str, str], Polynomial]:
    """The nonzero coefficients ``Q^a_i(x)`` of ``Q^a = sum_i y^i Q^a_i`` over weight-1 ``y^i``."""
    ctx = A.context
    fam = {}
    for a in ctx:
        if a.weight != 0:
            continue
        qa = A.Q.component(a.name)
        for y in ctx:
            if y.weight == 1:
                coeff = partial_derivative(qa, y.name).at_origin()
                if coeff:
                    fam[(a.name, y.name)] = coeff
    return fam


def anchor_field(A: HigherAlgebroid, u: VectorField) -> VectorField:
    """``a(u)`` as a vector field on the base (weight-0 coordinates only)."""
    _negative(u)
    Du = commutator(A.Q, u)
    ctx = A.context
    comps = {}
    for c in ctx:
        if c.weight == 0:
            comp = Du.component(c.name).homogeneous_component(0)
            if comp:
                comps[c.name] = comp
    return VectorField(ctx, comps)


def anchor_algebraic(A: HigherAlgebroid, u: VectorField, f: Polynomial) -> Polynomial:
    """``a(u) f = [[Q, u], f]`` for a base function ``f``."""
    if f and f.weight != 0:
        raise DerivedStructureError("anchor acts on weight-0 functions only")
    return apply(anchor_field(A, u), f)


def anchor_from_coefficients(A: HigherAlgebroid, u: VectorField) -> VectorField:
    """``(-1)^(p(u)+1) sum_i u^i Q^a_i d/dx^a`` built from :func:`anchor_geometric`."""
    ctx = A.context
    fam = anchor_geometric(A)
    sign = _sign(homogeneous_parity(u) + 1)
    comps = {}
    for (a, y), coeff in fam.items():
        ui = u.component(y).homogeneous_component(0)
        if ui and coeff:
            comps[a] = comps.get(a, ctx.zero) + sign * (ui * coeff)
    return VectorField(ctx, comps)


@dataclass
class AnchorComparison:
    ok: bool
    residuals: List[Tuple[VectorField, VectorField]] = field(default_factory=list)

    def __bool__(self):
        return self.ok


def anchors_agree(A: HigherAlgebroid, fields: Optional[Iterable[VectorField]] = None) -> AnchorComparison:
    """Compare the derived anchor with the coefficient formula on ``fields``
    (default: the whole negative basis)."""
    if fields is None:
        fields = A.basis.fields
    bad = []
    for u in fields:
        r = anchor_field(A, u) - anchor_from_coefficients(A, u)
        if r:
            bad.append((u, r))
    return AnchorComparison(not bad, bad)


def delta_f(A: HigherAlgebroid, f: Polynomial, u: VectorField) -> VectorField:
    """``(delta f)(u) = d(f u) - (-1)^p(f) f d(u)``."""
    if f and f.weight != 0:
        raise DerivedStructureError("f must have weight 0")
    _negative(u)
    p = f.parity
    if p is None:
        raise DerivedStructureError("f must have homogeneous parity")
    return derived_d(A, f * u) - _sign(p) * (f * derived_d(A, u))


# -- module basis of negative fields --------------------------------------


def _monomials_below(ctx: GradedContext, positive: Sequence[int], bound: int):
    """All monomials in ``positive`` coordinates with weight < bound."""
    out = []

    def rec(pos, mono, weight):
        if pos == len(positive):
            out.append(tuple(mono))
            return
        i = positive[pos]
        w = ctx.weights[i]
        max_e = 1 if ctx.parities[i] else (bound - 1 - weight) // w
        for e in range(0, max_e + 1):
            if weight + e * w >= bound:
                break
            rec(pos + 1, mono + ([(i, e)] if e else []), weight + e * w)

    rec(0, [], 0)
    return out


class NegativeBasis:
    """Fields ``m d/dc`` with ``w(c) > 0`` and ``w(m) < w(c)``, ``m`` a monomial
    in positive-weight coordinates.

    They span the negative-weight fields as a module over weight-0 functions.
    Order: field weight -1 first, then -2, ...; within a weight by target
    coordinate, then monomial.
    """

    def __init__(self, ctx: GradedContext):
        self.context = ctx
        positive = [i for i, w in enumerate(ctx.weights) if w > 0]
        self.positive = positive
        elems = []
        for c in positive:
            for m in _monomials_below(ctx, positive, ctx.weights[c]):
                elems.append((c, m))
        elems.sort(key=lambda cm: (ctx.weights[cm[0]] - ctx.mono_weight(cm[1]),
                                   cm[0], ctx.mono_key(cm[1])))
        self.elements: Tuple[Tuple[int, Monomial], ...] = tuple(elems)
        self.lookup = {e: k for k, e in enumerate(elems)}
        self.fields: Tuple[VectorField, ...] = tuple(
            VectorField(ctx, {c: Polynomial._raw(ctx, {m: Fraction(1)})}) for c, m in elems
        )
        self.parities = tuple(homogeneous_parity(f) for f in self.fields)
        self.weights_ = tuple(f.weight for f in self.fields)

    def __len__(self):
        return len(self.fields)

    def __iter__(self):
        return iter(self.fields)

    def __getitem__(self, k) -> VectorField:
        return self.fields[k]

    def label(self, k: int) -> str:
        c, m = self.elements[k]
        ctx = self.context
        mono = ctx.format_monomial(m)
        d = f"d/d{ctx.coordinates[c].name}"
        return f"{mono}*{d}" if mono else d

    def constant_index(self, name) -> int:
        return self.lookup[(self.context.index(name), ())]

    def is_constant(self, k: int) -> bool:
        return not self.elements[k][1]

    def expand(self, X: VectorField) -> LinComb:
        """Coefficients (weight-0 functions) of ``X`` in this basis."""
        ctx = self.context
        if X.context != ctx:
            raise DerivedStructureError("field lives in a different context")
        w = ctx.weights
        out: Dict[int, dict] = {}
        for c, comp in X.indexed():
            for M, coeff in comp.items():
                m0 = tuple((i, e) for i, e in M if w[i] == 0)
                mp = tuple((i, e) for i, e in M if w[i] != 0)
                k = self.lookup.get((c, mp))
                if k is None:
                    raise NotNegative(f"{X} is not in the span of negative fields")
                sign, check = ctx.mono_mul(m0, mp)
                assert check == M
                t = out.setdefault(k, {})
                val = t.get(m0, 0) + (coeff if sign > 0 else -coeff)
                if val:
                    t[m0] = val
                else:
                    t.pop(m0, None)
        return {k: Polynomial._raw(ctx, t) for k, t in sorted(out.items()) if t}

    def combine(self, lc: Mapping[int, Polynomial]) -> VectorField:
        total = VectorField(self.context)
        for k, g in lc.items():
            total = total + g * self.fields[k]
        return total

    def lc_parity(self, lc: LinComb) -> Optional[int]:
        ps = set()
        for k, g in lc.items():
            pg = g.parity
            if pg is None:
                return None
            ps.add((pg + self.parities[k]) & 1)
        if len(ps) > 1:
            return None
        return ps.pop() if ps else EVEN


# -- identity suite -------------------------------------------------------


@dataclass(frozen=True)
class Sample:
    u: VectorField
    v: VectorField
    w: VectorField
    f: Polynomial
    g: Polynomial


@dataclass
class SampleSet:
    """Evaluate every identity on all combinations of ``fields`` and ``functions``."""

    fields: Sequence[VectorField]
    functions: Sequence[Polynomial] = ()


def _p(x) -> int:
    if isinstance(x, VectorField):
        return homogeneous_parity(x)
    p = x.parity
    if p is None:
        raise DerivedStructureError("function of mixed parity")
    return p


def _id_dsq(A, u):
    return derived_d(A, derived_d(A, u))


def _id_dbrack(A, u, v):
    pu, pv = _p(u), _p(v)
    return derived_d(A, commutator(u, v)) - (
        derived_bracket2(A, u, v) - _sign(pu * pv) * derived_bracket2(A, v, u)
    )


def _id_dnewbrack(A, u, v):
    pu, pv = _p(u), _p(v)
    du, dv = derived_d(A, u), derived_d(A, v)
    rhs = (
        -_sign((pu + 1) * pv) * derived_bracket2(A, v, du)
        + _sign(pu + 1) * derived_bracket2(A, u, dv)
        + _sign(pu) * commutator(du, dv)
    )
    return derived_d(A, derived_bracket2(A, u, v)) - rhs


def _id_leib(A, u, v, w):
    pu, pv = _p(u), _p(v)
    rhs = commutator(derived_bracket2(A, u, v), w) + _sign((pu + 1) * pv) * commutator(
        v, derived_bracket2(A, u, w)
    )
    return derived_bracket2(A, u, commutator(v, w)) - rhs


def _id_jac(A, u, v, w):
    pu, pv = _p(u), _p(v)
    rhs = _sign(pu + 1) * derived_bracket2(A, derived_bracket2(A, u, v), w) + _sign(
        (pu + 1) * (pv + 1)
    ) * derived_bracket2(A, v, derived_bracket2(A, u, w))
    return derived_bracket2(A, u, derived_bracket2(A, v, w)) - rhs


def _id_linearlie(A, f, u, v):
    return commutator(f * u, v) - f * commutator(u, v)


def _id_anchorlin(A, g, u):
    return anchor_field(A, g * u) - _sign(_p(g)) * (g * anchor_field(A, u))


def _id_leibanchor(A, f, u, v):
    pu, pf = _p(u), _p(f)
    rhs = anchor_algebraic(A, u, f) * v + _sign((pu + 1) * pf) * (f * derived_bracket2(A, u, v))
    return derived_bracket2(A, u, f * v) - rhs


def _id_leibanchor2(A, f, u, v):
    pu, pv, pf = _p(u), _p(v), _p(f)
    rhs = (
        _sign(pf) * (f * derived_bracket2(A, u, v))
        + _sign((pf + pu) * pv) * (anchor_algebraic(A, v, f) * u)
        + delta_f(A, f, commutator(u, v))
    )
    return derived_bracket2(A, f * u, v) - rhs


# name, argument roles, function, whether the identity needs Q^2 = 0
IDENTITIES = (
    ("dsq", ("u",), _id_dsq, True),
    ("dbrack", ("u", "v"), _id_dbrack, False),
    ("dnewbrack", ("u", "v"), _id_dnewbrack, True),
    ("leib", ("u", "v", "w"), _id_leib, False),
    ("jac", ("u", "v", "w"), _id_jac, True),
    ("linearlie", ("f", "u", "v"), _id_linearlie, False),
    ("anchorlin", ("g", "u"), _id_anchorlin, False),
    ("leibanchor", ("f", "u", "v"), _id_leibanchor, False),
    ("leibanchor2", ("f", "u", "v"), _id_leibanchor2, False),
)
IDENTITY_NAMES = tuple(i[0] for i in IDENTITIES)


@dataclass
class IdentityResult:
    name: str
    checked: int = 0
    failures: int = 0
    args: Optional[dict] = None
    residual: Optional[VectorField] = None

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def line(self) -> str:
        if self.ok:
            return f"IDENTITY {self.name} OK"
        args = " ".join(f"{k}={v}" for k, v in self.args.items())
        return f"IDENTITY {self.name} FAIL {args} residual={self.residual}"

    def to_dict(self) -> dict:
        d = {"identity": self.name, "status": "OK" if self.ok else "FAIL",
             "checked": self.checked, "failures": self.failures}
        if not self.ok:
            d["args"] = {k: str(v) for k, v in self.args.items()}
            d["residual"] = str(self.residual)
        return d


@dataclass
class TwoLayerReport:
    results: List[IdentityResult]

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results)

    def __getitem__(self, name) -> IdentityResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    def lines(self) -> List[str]:
        return [r.line() for r in self.results]

    def __str__(self):
        return "\n".join(self.lines())

    def to_dict(self) -> dict:
        return {"ok": self.ok, "identities": [r.to_dict() for r in self.results]}


def _combos(roles, samples):
    if isinstance(samples, SampleSet):
        pools = [samples.functions if r in ("f", "g") else samples.fields for r in roles]
        yield from itertools.product(*pools)
    else:
        for s in samples:
            yield tuple(getattr(s, r) for r in roles)


def verify_two_layer(A: HigherAlgebroid, samples, only: Optional[Iterable[str]] = None) -> TwoLayerReport:
    """Evaluate the identity suite; each identity's residual must vanish.

    ``samples`` is a :class:`SampleSet` (exhaustive combinations) or an
    iterable of :class:`Sample` tuples.
    """
    if not isinstance(samples, SampleSet):
        samples = list(samples)
    wanted = set(only) if only is not None else None
    results = []
    for name, roles, fn, _ in IDENTITIES:
        if wanted is not None and name not in wanted:
            continue
        res = IdentityResult(name)
        for args in _combos(roles, samples):
            res.checked += 1
            r = fn(A, *args)
            if r:
                res.failures += 1
                if res.args is None:
                    res.args = dict(zip(roles, args))
                    res.residual = r
        if res.checked:
            results.append(res)
    return TwoLayerReport(results)


def basis_samples(A: HigherAlgebroid, functions: Optional[Sequence[Polynomial]] = None) -> SampleSet:
    """The whole negative basis with the default test functions."""
    if functions is None:
        functions = default_functions(A.context)
    return SampleSet(A.basis.fields, functions)


def default_functions(ctx: GradedContext) -> List[Polynomial]:
    fs = [ctx.one, ctx.const(Fraction(-3, 2))]
    for c in ctx:
        if c.weight == 0:
            fs.append(ctx.var(c.name))
    base = [c.name for c in ctx if c.weight == 0 and c.parity == EVEN]
    if base:
        x = ctx.var(base[0])
        fs.append(x * x + ctx.const(2))
    return fs


def random_function(rng: random.Random, ctx: GradedContext, parity: int, terms: int = 3) -> Polynomial:
    """A random weight-0 polynomial of the given parity (zero if impossible)."""
    base = [c.name for c in ctx if c.weight == 0]
    f = ctx.zero
    for _ in range(terms):
        k = rng.randint(0, 2)
        mono = ctx.one
        for _ in range(k):
            if base:
                mono = mono * ctx.var(rng.choice(base))
        if mono.parity != parity:
            odd = [n for n in base if ctx[n].parity == ODD]
            if not odd:
                continue
            mono = mono * ctx.var(rng.choice(odd))
        if mono and mono.parity == parity:
            f = f + Fraction(rng.randint(-4, 4), rng.randint(1, 3)) * mono
    return f


def random_negative_field(rng: random.Random, A: HigherAlgebroid, parity: Optional[int] = None,
                          terms: int = 2) -> VectorField:
    basis = A.basis
    ctx = A.context
    if not len(basis):
        return VectorField(ctx)
    if parity is None:
        parity = rng.randint(0, 1)
    u = VectorField(ctx)
    for _ in range(terms):
        k = rng.randrange(len(basis))
        g = random_function(rng, ctx, (parity + basis.parities[k]) & 1, terms=2)
        u = u + g * basis[k]
    return u


def random_samples(A: HigherAlgebroid, n: int, seed: int = 0) -> List[Sample]:
    rng = random.Random(seed)
    ctx = A.context
    has_odd_base = any(c.weight == 0 and c.parity == ODD for c in ctx)
    out = []
    for _ in range(n):
        fp = rng.randint(0, 1) if has_odd_base else EVEN
        gp = rng.randint(0, 1) if has_odd_base else EVEN
        out.append(Sample(
            random_negative_field(rng, A),
            random_negative_field(rng, A),
            random_negative_field(rng, A),
            random_function(rng, ctx, fp),
            random_function(rng, ctx, gp),
        ))
    return out


# -- tables ---------------------------------------------------------------


@dataclass
class TwoLayerStructure:
    """Structure coefficients of ``[,]``, ``d``, ``{,}`` and the anchor on the
    canonical negative basis. Entries are linear combinations
    ``{basis index: weight-0 coefficient}``; the anchor entries are base
    vector fields."""

    context: GradedContext
    basis: NegativeBasis
    bracket: Dict[Tuple[int, int], LinComb]
    differential: Dict[int, LinComb]
    derived: Dict[Tuple[int, int], LinComb]
    anchor: Dict[int, VectorField]
    name: str = "Q"

    def __eq__(self, other):
        if not isinstance(other, TwoLayerStructure):
            return NotImplemented
        return (self.context == other.context and self.bracket == other.bracket
                and self.differential == other.differential and self.derived == other.derived
                and self.anchor == other.anchor)


def two_layer(A: HigherAlgebroid) -> TwoLayerStructure:
    B = A.basis
    n = len(B)
    bracket, derived, diff, anchor = {}, {}, {}, {}
    for i in range(n):
        diff[i] = B.expand(derived_d(A, B[i]))
        anchor[i] = anchor_field(A, B[i])
        for j in range(n):
            bracket[(i, j)] = B.expand(commutator(B[i], B[j]))
            derived[(i, j)] = B.expand(derived_bracket2(A, B[i], B[j]))
    return TwoLayerStructure(A.context, B, bracket, diff, derived, anchor, A.name)


def canonical_brackets(B: NegativeBasis) -> Dict[Tuple[int, int], LinComb]:
    n = len(B)
    return {(i, j): B.expand(commutator(B[i], B[j])) for i in range(n) for j in range(n)}


# table algebra: every operation below reads only the tables


def _lc_add(a: LinComb, b: LinComb, sign: int = 1) -> LinComb:
    out = dict(a)
    for k, g in b.items():
        s = out[k] + sign * g if k in out else sign * g
        if s:
            out[k] = s
        else:
            out.pop(k, None)
    return out


def _lc_scale(h: Polynomial, lc: LinComb) -> LinComb:
    out = {}
    for k, g in lc.items():
        s = h * g
        if s:
            out[k] = s
    return out


def _tab_bracket_right(T: TwoLayerStructure, lc: LinComb, j: int) -> LinComb:
    """``[sum g_i b_i, b_j] = sum g_i [b_i, b_j]``."""
    out: LinComb = {}
    for i, g in lc.items():
        out = _lc_add(out, _lc_scale(g, T.bracket[(i, j)]))
    return out


def _tab_bracket_left(T: TwoLayerStructure, i: int, lc: LinComb) -> LinComb:
    """``[b_i, sum g_j b_j] = sum (-1)^(p_i p(g_j)) g_j [b_i, b_j]``."""
    pi = T.basis.parities[i]
    out: LinComb = {}
    for j, g in lc.items():
        out = _lc_add(out, _lc_scale(g, T.bracket[(i, j)]), _sign(pi * _p(g)))
    return out


def _tab_derived_left(T: TwoLayerStructure, i: int, lc: LinComb) -> LinComb:
    """``{b_i, sum g_j b_j}`` via the Leibniz rule in the second slot."""
    pi = T.basis.parities[i]
    out: LinComb = {}
    for j, g in lc.items():
        ag = apply(T.anchor[i], g)
        if ag:
            out = _lc_add(out, {j: ag})
        out = _lc_add(out, _lc_scale(g, T.derived[(i, j)]), _sign((pi + 1) * _p(g)))
    return out


def _tab_d_rational(T: TwoLayerStructure, lc: LinComb) -> LinComb:
    out: LinComb = {}
    for j, g in lc.items():
        if g.variables():
            raise InconsistentTables("d applied to a non-constant combination")
        out = _lc_add(out, _lc_scale(g, T.differential[j]))
    return out


@dataclass
class TableCheck:
    ok: bool
    problems: List[str] = field(default_factory=list)

    def __bool__(self):
        return self.ok


def check_tables(T: TwoLayerStructure) -> TableCheck:
    """Consistency of the tables without reference to any ``Q``.

    Checks the first layer against the canonical commutators, the grading of
    every entry, and the identities that hold for every odd weight-one
    derivation (``dbrack`` and ``leib``) on basis pairs and triples.
    """
    B = T.basis
    n = len(B)
    L = [B.label(k) for k in range(n)]
    problems = []
    canon = canonical_brackets(B)
    for key, lc in canon.items():
        if T.bracket.get(key, {}) != lc:
            problems.append(f"bracket {key} differs from the commutator of basis fields")

    def graded(lc, parity, weight):
        for k, g in lc.items():
            if g.weight != 0 or g.parity is None:
                return False
            if (g.parity + B.parities[k]) & 1 != parity or B.weights_[k] != weight:
                return False
        return True

    for i in range(n):
        if not graded(T.differential.get(i, {}), (B.parities[i] + 1) & 1, B.weights_[i] + 1):
            problems.append(f"d({L[i]}) is not odd of weight +1")
        a = T.anchor.get(i, VectorField(T.context))
        if a and (a.weight != 0 or (a.parity != (B.parities[i] + 1) & 1) or
                  any(T.context[c].weight != 0 for c in a.components) or B.weights_[i] != -1):
            problems.append(f"anchor({L[i]}) is not an odd weight-0 base field")
        for j in range(n):
            if not graded(T.derived.get((i, j), {}), (B.parities[i] + B.parities[j] + 1) & 1,
                          B.weights_[i] + B.weights_[j] + 1):
                problems.append(f"{{{L[i]}, {L[j]}}} is not odd of weight +1")
    if problems:
        return TableCheck(False, problems)
    P = B.parities
    for i in range(n):
        for j in range(n):
            lhs = _tab_d_rational(T, T.bracket[(i, j)])
            rhs = _lc_add(T.derived[(i, j)], T.derived[(j, i)], -_sign(P[i] * P[j]))
            if _lc_add(lhs, rhs, -1):
                problems.append(f"dbrack fails on ({L[i]}, {L[j]})")
            for k in range(n):
                lhs = _tab_derived_left(T, i, T.bracket[(j, k)])
                rhs = _lc_add(
                    _tab_bracket_right(T, T.derived[(i, j)], k),
                    _tab_bracket_left(T, j, T.derived[(i, k)]),
                    _sign((P[i] + 1) * P[j]),
                )
                if _lc_add(lhs, rhs, -1):
                    problems.append(f"leib fails on ({L[i]}, {L[j]}, {L[k]})")
    return TableCheck(not problems, problems)


# -- L-infinity brackets and reconstruction -------------------------------


@dataclass
class LInftyStructure:
    """Brackets on the classes of ``d/dc`` (``w(c) > 0``) modulo fields vanishing
    at the origin. ``brackets[(c1, ..., ck)]`` maps class names to weight-0
    coefficients; argument tuples are in chart order, odd classes unrepeated.
    """

    context: GradedContext
    classes: Tuple[str, ...]
    brackets: Dict[Tuple[str, ...], Dict[str, Polynomial]]
    lifting: str = "constant"

    def arity(self) -> int:
        return max((len(k) for k in self.brackets), default=0)

    def bracket(self, *names) -> Dict[str, Polynomial]:
        key = tuple(sorted(names, key=self.context.index))
        return self.brackets.get(key, {})


def _argument_tuples(ctx: GradedContext, classes: Sequence[str], max_k: int):
    idx = [ctx.index(c) for c in classes]
    for k in range(1, max_k + 1):
        for combo in itertools.combinations_with_replacement(idx, k):
            if any(ctx.parities[i] and combo.count(i) > 1 for i in set(combo)):
                continue
            yield tuple(ctx.coordinates[i].name for i in combo)


def _class_of(B: NegativeBasis, lc: LinComb) -> Dict[str, Polynomial]:
    out = {}
    for k, g in lc.items():
        if B.is_constant(k):
            out[B.context.coordinates[B.elements[k][0]].name] = g
    return out


def _validate_lifting(B: NegativeBasis, lifting: Mapping[str, VectorField]):
    for name, u in lifting.items():
        lc = B.expand(u)
        cls = _class_of(B, lc)
        if set(cls) != {name} or cls[name] != B.context.one:
            raise DerivedStructureError(f"lifting of {name} is not a section of the quotient map")
        for k, g in lc.items():
            if not B.is_constant(k) and g.weight != 0:
                raise DerivedStructureError(f"lifting of {name} is not a section")


def linfty_brackets(A: HigherAlgebroid, lifting: Optional[Mapping[str, VectorField]] = None) -> LInftyStructure:
    """``(u1, ..., uk) = class of P[...[Q, u1], ..., uk]`` on the quotient classes."""
    ctx = A.context
    B = A.basis
    classes = tuple(ctx.coordinates[i].name for i in B.positive)
    lifts = {c: VectorField.partial(ctx, c) for c in classes}
    label = "constant"
    if lifting is not None:
        _validate_lifting(B, lifting)
        lifts.update(lifting)
        label = "custom"
    N = ctx.degree_N or 0
    brackets = {}
    for args in _argument_tuples(ctx, classes, N + 1):
        F = A.Q
        for name in args:
            F = commutator(F, lifts[name])
        brackets[args] = _class_of(B, B.expand(negative_part(F)))
    return LInftyStructure(ctx, classes, brackets, label)


def linfty_from_tables(T: TwoLayerStructure) -> LInftyStructure:
    """The same brackets, read off the tables with constant liftings:
    ``class(d u)``, ``class({u, v})`` and ``class([...[{u1, u2}, u3], ..., uk])``."""
    ctx = T.context
    B = T.basis
    classes = tuple(ctx.coordinates[i].name for i in B.positive)
    N = ctx.degree_N or 0
    brackets = {}
    for args in _argument_tuples(ctx, classes, N + 1):
        ks = [B.constant_index(a) for a in args]
        if len(ks) == 1:
            lc = T.differential[ks[0]]
        else:
            lc = T.derived[(ks[0], ks[1])]
            for k in ks[2:]:
                lc = _tab_bracket_right(T, lc, k)
        brackets[args] = _class_of(B, lc)
    return LInftyStructure(ctx, classes, brackets)


def _taylor_normalizer(ctx: GradedContext, target: int, factors: Sequence[int], mono: Monomial) -> Fraction:
    """Factor ``r`` with ``class([...[Q, d_c1], ..., d_ck])^target = r * q`` when
    ``Q^target`` contains the term ``q * mono`` and ``mono = c1...ck``."""
    par = ctx.parities
    sign = 1
    acc = ODD
    for c in factors:
        sign *= -_sign(acc * par[c])
        acc ^= par[c]
    pm = ctx.mono_parity(mono)
    pq = (1 + par[target] + pm) & 1
    sign *= _sign(pq * pm)
    f = Polynomial._raw(ctx, {mono: Fraction(1)})
    for c in factors:
        f = partial_derivative(f, ctx.coordinates[c].name)
    return sign * f.constant_term()


def q_from_linfty(L: LInftyStructure, anchor_coefficients: Mapping[Tuple[str, str], Polynomial]) -> VectorField:
    """Rebuild ``Q`` from its Taylor coefficients.

    Positive-weight components come from the L-infinity brackets, base
    components from the anchor coefficients ``Q^a_i``.
    """
    ctx = L.context
    comps: Dict[str, Polynomial] = {}
    for args, values in L.brackets.items():
        factors = [ctx.index(a) for a in args]
        mono: dict = {}
        for i in factors:
            mono[i] = mono.get(i, 0) + 1
        mono = tuple(sorted(mono.items()))
        for tname, value in values.items():
            t = ctx.index(tname)
            r = _taylor_normalizer(ctx, t, factors, mono)
            q = value * (Fraction(1) / r)
            term = q * Polynomial._raw(ctx, {mono: Fraction(1)})
            comps[tname] = comps.get(tname, ctx.zero) + term
    for (a, y), coeff in anchor_coefficients.items():
        if coeff:
            comps[a] = comps.get(a, ctx.zero) + ctx.var(y) * coeff
    return VectorField(ctx, comps)


def anchor_coefficients_from_tables(T: TwoLayerStructure) -> Dict[Tuple[str, str], Polynomial]:
    """``Q^a_i`` from the anchor table: ``a(d/dy^i) = (-1)^(p(y^i)+1) Q^a_i d/dx^a``."""
    ctx = T.context
    out = {}
    for c in ctx:
        if c.weight != 1:
            continue
        k = T.basis.constant_index(c.name)
        a = T.anchor[k]
        for name, comp in a.components.items():
            out[(name, c.name)] = _sign(c.parity + 1) * comp
    return out


def recover_Q(T: TwoLayerStructure, check: bool = True) -> VectorField:
    """Reconstruct ``Q`` from its two-layer tables.

    With ``check`` the tables are validated first (:func:`check_tables`) and
    the result is re-tabulated and compared entry by entry; any mismatch
    raises :class:`InconsistentTables`.
    """
    if check:
        tc = check_tables(T)
        if not tc:
            raise InconsistentTables("inconsistent two-layer tables: " + "; ".join(tc.problems[:5]),
                                     tc.problems)
    L = linfty_from_tables(T)
    Q = q_from_linfty(L, anchor_coefficients_from_tables(T))
    if check:
        try:
            A = HigherAlgebroid(Q, require_homological=False, name=T.name)
        except GradedAlgebraError as exc:
            raise InconsistentTables(f"reconstructed field is not valid: {exc}") from exc
        again = two_layer(A)
        if again != T:
            raise InconsistentTables("tables are not generated by any weight-1 field", again)
    return Q
