"""Polynomial vector fields on a graded chart.

A vector field ``X = X^c d/dc`` is stored as one polynomial per coordinate.
Fields act on functions from the left, and the super commutator is

    [X, Y]^c = X(Y^c) - (-1)^{p(X) p(Y)} Y(X^c).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Mapping, Optional

from .graded_algebra import (
    EVEN,
    ODD,
    ContextMismatch,
    Coordinate,
    GradedAlgebraError,
    GradedContext,
    ParityMismatch,
    Polynomial,
    _guard,
    partial_derivative,
    substitute,
)


class VectorFieldError(GradedAlgebraError):
    pass


class InhomogeneousParity(VectorFieldError):
    pass


class NonInvertibleChange(VectorFieldError):
    pass


class VectorField:
    """A derivation ``sum_c X^c d/dc``; missing components are zero."""

    __slots__ = ("context", "_comp", "_hash")

    def __init__(self, context: GradedContext, components: Mapping = ()):
        comp = {}
        items = components.items() if isinstance(components, Mapping) else components
        for key, val in items:
            i = key if isinstance(key, int) else context.index(key)
            if isinstance(val, (int, Fraction)):
                val = context.const(val)
            if val.context != context:
                raise ContextMismatch("component lives in a different context")
            if val:
                comp[i] = comp[i] + val if i in comp else val
                if not comp[i]:
                    del comp[i]
        self.context = context
        self._comp: Dict[int, Polynomial] = comp
        self._hash = None

    @classmethod
    def _raw(cls, context, comp):
        obj = cls.__new__(cls)
        obj.context = context
        obj._comp = comp
        obj._hash = None
        return obj

    @classmethod
    def partial(cls, context: GradedContext, name) -> "VectorField":
        """The coordinate field d/d(name)."""
        return cls._raw(context, {context.index(name): context.one})

    # -- protocol ---------------------------------------------------------

    @property
    def components(self) -> Dict[str, Polynomial]:
        names = self.context.coordinates
        return {names[i].name: p for i, p in sorted(self._comp.items())}

    def component(self, name) -> Polynomial:
        return self._comp.get(self.context.index(name), self.context.zero)

    def indexed(self):
        return sorted(self._comp.items())

    def __bool__(self):
        return bool(self._comp)

    def is_zero(self) -> bool:
        return not self._comp

    def __eq__(self, other):
        if not isinstance(other, VectorField):
            if other == 0:
                return not self._comp
            return NotImplemented
        return self.context == other.context and self._comp == other._comp

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.context, frozenset(self._comp.items())))
        return self._hash

    def _check(self, other):
        if not isinstance(other, VectorField):
            raise TypeError(f"expected VectorField, got {type(other).__name__}")
        if other.context != self.context:
            raise ContextMismatch("vector fields live in different contexts")

    def __add__(self, other):
        if isinstance(other, int) and other == 0:
            return self
        self._check(other)
        out = dict(self._comp)
        for i, p in other._comp.items():
            s = out[i] + p if i in out else p
            if s:
                out[i] = s
            else:
                out.pop(i, None)
        return VectorField._raw(self.context, out)

    __radd__ = __add__

    def __neg__(self):
        return VectorField._raw(self.context, {i: -p for i, p in self._comp.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, f):
        """Left multiplication by a function or a rational number."""
        if isinstance(f, (int, Fraction)):
            if not f:
                return VectorField._raw(self.context, {})
            return VectorField._raw(self.context, {i: p * f for i, p in self._comp.items()})
        if isinstance(f, Polynomial):
            if f.context != self.context:
                raise ContextMismatch("function lives in a different context")
            out = {}
            for i, p in self._comp.items():
                q = f * p
                if q:
                    out[i] = q
            return VectorField._raw(self.context, out)
        return NotImplemented

    def __mul__(self, f):
        if isinstance(f, (int, Fraction)):
            return f * self
        return NotImplemented

    def __call__(self, f: Polynomial) -> Polynomial:
        return apply(self, f)

    # -- grading ----------------------------------------------------------

    @property
    def parity(self) -> Optional[int]:
        """Common parity of all terms (EVEN for zero), None if mixed."""
        par = self.context.parities
        ps = set()
        for i, p in self._comp.items():
            for m in p._terms:
                ps.add((self.context.mono_parity(m) + par[i]) & 1)
                if len(ps) > 1:
                    return None
        return ps.pop() if ps else EVEN

    def weights(self) -> set:
        w = self.context.weights
        return {
            self.context.mono_weight(m) - w[i] for i, p in self._comp.items() for m in p._terms
        }

    @property
    def weight(self) -> Optional[int]:
        ws = self.weights()
        if len(ws) > 1:
            return None
        return ws.pop() if ws else 0

    def __str__(self):
        names = self.context.coordinates
        body = ", ".join(f"{names[i].name}: {p}" for i, p in sorted(self._comp.items()))
        return "{" + body + "}"

    def __repr__(self):
        return f"VectorField({self})"


def _same_context(*objs):
    ctx = objs[0].context
    for o in objs[1:]:
        if o.context != ctx:
            raise ContextMismatch("arguments live in different contexts")
    return ctx


def apply(X: VectorField, f: Polynomial) -> Polynomial:
    """``X(f) = sum_c X^c * d_c f`` with left derivatives."""
    ctx = _same_context(X, f)
    result = ctx.zero
    for i, comp in X._comp.items():
        df = partial_derivative(f, i_name(ctx, i))
        if df:
            result = result + comp * df
    return result


def i_name(ctx: GradedContext, i: int) -> str:
    return ctx.coordinates[i].name


def homogeneous_parity(X: VectorField) -> int:
    p = X.parity
    if p is None:
        raise InhomogeneousParity(f"vector field of mixed parity: {X}")
    return p


def commutator(X: VectorField, Y: VectorField) -> VectorField:
    """Super commutator of two parity-homogeneous vector fields."""
    _same_context(X, Y)
    out = _commutator(X, Y)
    # cached results skip the multiplications, so re-check the size here
    for comp in out._comp.values():
        _guard(len(comp))
    return out


@lru_cache(maxsize=1 << 16)
def _commutator(X: VectorField, Y: VectorField) -> VectorField:
    ctx = X.context
    if not X._comp or not Y._comp:
        return VectorField._raw(ctx, {})
    sign = -1 if homogeneous_parity(X) & homogeneous_parity(Y) else 1
    out = {}
    for i in set(X._comp) | set(Y._comp):
        c = ctx.zero
        if i in Y._comp:
            c = c + apply(X, Y._comp[i])
        if i in X._comp:
            yx = apply(Y, X._comp[i])
            c = c - yx if sign > 0 else c + yx
        if c:
            out[i] = c
    return VectorField._raw(ctx, out)


@dataclass
class HomologicalCheck:
    ok: bool
    square: VectorField
    witness: Optional[str] = None
    witness_component: Optional[Polynomial] = None

    def __bool__(self):
        return self.ok


def is_homological(Q: VectorField) -> HomologicalCheck:
    """Check ``[Q, Q] = 0``; the witness is the first nonzero component."""
    if Q and homogeneous_parity(Q) != ODD:
        raise VectorFieldError("a homological vector field must be odd")
    sq = commutator(Q, Q)
    if not sq:
        return HomologicalCheck(True, sq)
    i, comp = sq.indexed()[0]
    return HomologicalCheck(False, sq, i_name(Q.context, i), comp)


def weight_decompose(X: VectorField) -> Dict[int, VectorField]:
    """Split ``X`` into weight-homogeneous parts keyed by weight."""
    ctx = X.context
    w = ctx.weights
    parts: Dict[int, dict] = {}
    for i, comp in X._comp.items():
        for m, c in comp._terms.items():
            n = ctx.mono_weight(m) - w[i]
            parts.setdefault(n, {}).setdefault(i, {})[m] = c
    return {
        n: VectorField._raw(ctx, {i: Polynomial._raw(ctx, t) for i, t in comps.items()})
        for n, comps in sorted(parts.items())
    }


def negative_part(X: VectorField) -> VectorField:
    """Projection onto fields of negative weight."""
    return sum((p for n, p in weight_decompose(X).items() if n < 0), VectorField(X.context))


def nonnegative_part(X: VectorField) -> VectorField:
    return sum((p for n, p in weight_decompose(X).items() if n >= 0), VectorField(X.context))


@dataclass
class RelatednessCheck:
    ok: bool
    residuals: Dict[str, Polynomial] = field(default_factory=dict)

    def __bool__(self):
        return self.ok

    def failures(self) -> Dict[str, Polynomial]:
        return {k: v for k, v in self.residuals.items() if v}


def _check_map(sigma: Mapping, codomain: GradedContext, domain: GradedContext) -> dict:
    images = {}
    for c in codomain:
        if c.name not in sigma:
            raise VectorFieldError(f"map does not define coordinate {c.name!r}")
        val = sigma[c.name]
        if isinstance(val, (int, Fraction)):
            val = domain.const(val)
        if val.context != domain:
            raise ContextMismatch(f"image of {c.name} lives in the wrong context")
        p = val.parity
        if p is None or (val and p != c.parity):
            raise ParityMismatch(f"image of {c.name} has the wrong parity")
        images[c.name] = val
    return images


def check_f_related(sigma: Mapping, Q1: VectorField, Q2: VectorField) -> RelatednessCheck:
    """Check that ``Q1`` and ``Q2`` are related by the map ``sigma``.

    ``sigma`` sends every coordinate of ``Q2``'s chart to a polynomial on
    ``Q1``'s chart. The residual at coordinate ``c`` is
    ``sigma^*(Q2^c) - Q1(sigma^*(c))``.
    """
    images = _check_map(sigma, Q2.context, Q1.context)
    residuals = {}
    for c in Q2.context:
        pulled = substitute(Q2.component(c.name), images, Q1.context)
        residuals[c.name] = pulled - apply(Q1, images[c.name])
    return RelatednessCheck(all(not r for r in residuals.values()), residuals)


def shifted_tangent(context: GradedContext, prefix: str = "d") -> GradedContext:
    """Chart of the parity-shifted tangent bundle: ``z`` plus ``dz`` with flipped
    parity and weight raised by one."""
    extra = []
    for c in context:
        name = prefix + c.name
        while name in context or any(e.name == name for e in extra):
            name = prefix + name
        extra.append(Coordinate(name, 1 - c.parity, c.weight + 1))
    return context.extend(extra)


def de_rham_field(tangent: GradedContext, n: int) -> VectorField:
    """``d = dz^mu d/dz^mu`` on a chart built by :func:`shifted_tangent`."""
    return VectorField(
        tangent, {tangent[i].name: tangent.var(tangent[n + i].name) for i in range(n)}
    )


def tautological_map(Q: VectorField, tangent: Optional[GradedContext] = None):
    """The section ``z -> (z, dz = Q(z))`` as a map into the shifted tangent chart.

    Returns ``(sigma, tangent_context, d)``.
    """
    ctx = Q.context
    tangent = tangent or shifted_tangent(ctx)
    n = len(ctx)
    sigma = {}
    for i, c in enumerate(ctx):
        sigma[c.name] = ctx.var(c.name)
        sigma[tangent[n + i].name] = Q.component(c.name)
    return sigma, tangent, de_rham_field(tangent, n)


class CoordinateChange:
    """An invertible weight-preserving polynomial change of coordinates.

    ``old_in_new`` expresses every coordinate of ``old`` as a polynomial on
    ``new``; ``new_in_old`` is the inverse.
    """

    def __init__(
        self,
        new: GradedContext,
        old: GradedContext,
        old_in_new: Mapping,
        new_in_old: Mapping,
        check: bool = True,
    ):
        self.new = new
        self.old = old
        self.old_in_new = _check_map(old_in_new, old, new)
        self.new_in_old = _check_map(new_in_old, new, old)
        if check:
            self._verify()

    def _verify(self):
        for c in self.old:
            img = self.old_in_new[c.name]
            if img and img.weight != c.weight:
                raise VectorFieldError(f"change does not preserve the weight of {c.name}")
        for c in self.old:
            back = substitute(self.old_in_new[c.name], self.new_in_old, self.old)
            if back != self.old.var(c.name):
                raise NonInvertibleChange(f"inverse fails on {c.name}: got {back}")
        for c in self.new:
            back = substitute(self.new_in_old[c.name], self.old_in_new, self.new)
            if back != self.new.var(c.name):
                raise NonInvertibleChange(f"inverse fails on {c.name}: got {back}")

    def to_old(self, f: Polynomial) -> Polynomial:
        return substitute(f, self.new_in_old, self.old)

    def to_new(self, f: Polynomial) -> Polynomial:
        return substitute(f, self.old_in_new, self.new)


def pushforward_basis_field(X: VectorField, change: CoordinateChange) -> VectorField:
    """Rewrite a field given on the new chart in the old coordinates.

    Component ``c`` of the result is ``X(old_c)`` expressed back in old
    coordinates.
    """
    if X.context != change.new:
        raise ContextMismatch("field does not live on the new chart")
    comps = {}
    for c in change.old:
        comps[c.name] = change.to_old(apply(X, change.old_in_new[c.name]))
    return VectorField(change.old, comps)
