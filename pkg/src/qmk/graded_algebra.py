"""Exact supercommutative polynomials over a graded coordinate chart.

Every coordinate carries a parity (0 even, 1 odd) and an integer weight.
Monomials are stored in the declaration order of their context; bringing a
product into that order costs one Koszul sign per transposition of two odd
factors, and an odd factor squared kills the monomial.

Coefficients are :class:`fractions.Fraction`; nothing here ever touches a
float.
"""

from __future__ import annotations

import bisect
import os
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Optional, Tuple, Union

EVEN = 0
ODD = 1

# A monomial is a tuple of (coordinate index, exponent) pairs sorted by index.
Monomial = Tuple[Tuple[int, int], ...]
ONE: Monomial = ()

Number = Union[int, Fraction]

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class GradedAlgebraError(ValueError):
    """Base class for errors raised by the polynomial kernel."""


class ContextMismatch(GradedAlgebraError):
    pass


class UnknownCoordinate(GradedAlgebraError):
    pass


class ParityMismatch(GradedAlgebraError):
    pass


class TermLimitExceeded(GradedAlgebraError):
    """Raised when a result has more terms than ``QMK_MAX_TERMS`` allows."""


def term_limit() -> Optional[int]:
    raw = os.environ.get("QMK_MAX_TERMS")
    if not raw:
        return None
    try:
        limit = int(raw)
    except ValueError:
        raise GradedAlgebraError(f"QMK_MAX_TERMS must be an integer, got {raw!r}")
    return limit if limit > 0 else None


def _guard(n_terms: int) -> None:
    limit = term_limit()
    if limit is not None and n_terms > limit:
        raise TermLimitExceeded(
            f"polynomial with {n_terms} terms exceeds QMK_MAX_TERMS={limit}"
        )


@dataclass(frozen=True)
class Coordinate:
    name: str
    parity: int = EVEN
    weight: int = 0

    def __post_init__(self):
        if not _IDENT.match(self.name):
            raise GradedAlgebraError(f"invalid coordinate name {self.name!r}")
        if self.parity not in (EVEN, ODD):
            raise GradedAlgebraError(f"parity of {self.name} must be 0 or 1")
        if not isinstance(self.weight, int):
            raise GradedAlgebraError(f"weight of {self.name} must be an integer")


class GradedContext:
    """An ordered chart of graded coordinates.

    The declaration order is the canonical order used to normalize monomials.
    Two contexts are equal when they declare the same coordinates in the same
    order.
    """

    def __init__(self, coordinates: Iterable[Coordinate]):
        self.coordinates: Tuple[Coordinate, ...] = tuple(coordinates)
        self._index = {}
        for i, c in enumerate(self.coordinates):
            if c.name in self._index:
                raise GradedAlgebraError(f"duplicate coordinate name {c.name!r}")
            self._index[c.name] = i
        self.parities = tuple(c.parity for c in self.coordinates)
        self.weights = tuple(c.weight for c in self.coordinates)
        self._hash = hash(self.coordinates)
        self._mul_cache: dict = {}

    @classmethod
    def of(cls, *specs) -> "GradedContext":
        """Build a context from ``(name, parity, weight)`` triples."""
        return cls(Coordinate(*s) for s in specs)

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, GradedContext):
            return NotImplemented
        return self.coordinates == other.coordinates

    def __hash__(self):
        return self._hash

    def __len__(self):
        return len(self.coordinates)

    def __iter__(self) -> Iterator[Coordinate]:
        return iter(self.coordinates)

    def __contains__(self, name) -> bool:
        if isinstance(name, Coordinate):
            name = name.name
        return name in self._index

    def __repr__(self):
        inner = ", ".join(
            f"{c.name}:{'odd' if c.parity else 'even'}/{c.weight}" for c in self
        )
        return f"GradedContext({inner})"

    def index(self, name) -> int:
        if isinstance(name, Coordinate):
            name = name.name
        try:
            return self._index[name]
        except KeyError:
            raise UnknownCoordinate(f"unknown coordinate {name!r}") from None

    def __getitem__(self, name) -> Coordinate:
        if isinstance(name, int):
            return self.coordinates[name]
        return self.coordinates[self.index(name)]

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(c.name for c in self.coordinates)

    @property
    def degree_N(self) -> Optional[int]:
        """Maximal coordinate weight, or None if some weight is negative."""
        if any(w < 0 for w in self.weights):
            return None
        return max(self.weights, default=0)

    def extend(self, coordinates: Iterable[Coordinate]) -> "GradedContext":
        return GradedContext(self.coordinates + tuple(coordinates))

    # -- constructors -----------------------------------------------------

    def var(self, name) -> "Polynomial":
        return Polynomial._raw(self, {((self.index(name), 1),): Fraction(1)})

    def const(self, value: Number) -> "Polynomial":
        value = Fraction(value)
        return Polynomial._raw(self, {ONE: value} if value else {})

    @property
    def zero(self) -> "Polynomial":
        return Polynomial._raw(self, {})

    @property
    def one(self) -> "Polynomial":
        return self.const(1)

    def vars(self, *names) -> Tuple["Polynomial", ...]:
        return tuple(self.var(n) for n in names)

    # -- monomial bookkeeping ---------------------------------------------

    def mono_parity(self, m: Monomial) -> int:
        p = self.parities
        return sum(p[i] * e for i, e in m) & 1

    def mono_weight(self, m: Monomial) -> int:
        w = self.weights
        return sum(w[i] * e for i, e in m)

    def mono_mul(self, m1: Monomial, m2: Monomial):
        """Return ``(sign, m)`` with ``m1*m2 = sign*m``, or None if zero."""
        key = (m1, m2)
        try:
            return self._mul_cache[key]
        except KeyError:
            pass
        result = self._mono_mul(m1, m2)
        self._mul_cache[key] = result
        return result

    def _mono_mul(self, m1, m2):
        par = self.parities
        odd1 = [i for i, _ in m1 if par[i]]
        sign = 1
        if odd1:
            for i, _ in m2:
                if par[i]:
                    pos = bisect.bisect_left(odd1, i)
                    if pos < len(odd1) and odd1[pos] == i:
                        return None
                    # odd factors of m1 with a larger index must be passed
                    if (len(odd1) - pos) & 1:
                        sign = -sign
        exps = dict(m1)
        for i, e in m2:
            exps[i] = exps.get(i, 0) + e
        return sign, tuple(sorted(exps.items()))

    def mono_key(self, m: Monomial):
        """Sort key: weight first, then degree, then graded lex order."""
        return (self.mono_weight(m), sum(e for _, e in m), tuple((i, -e) for i, e in m))

    def format_monomial(self, m: Monomial) -> str:
        parts = []
        for i, e in m:
            name = self.coordinates[i].name
            parts.append(name if e == 1 else f"{name}^{e}")
        return "*".join(parts)


def _fmt_coeff(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


class Polynomial:
    """A supercommutative polynomial with rational coefficients.

    Instances are immutable; arithmetic returns new objects. Zero
    coefficients are never stored.
    """

    __slots__ = ("context", "_terms", "_hash")

    def __init__(self, context: GradedContext, terms: Mapping = ()):
        clean = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for mono, coeff in items:
            mono = self._check_monomial(context, mono)
            if mono is None:
                continue
            coeff = Fraction(coeff)
            if coeff:
                total = clean.get(mono, 0) + coeff
                if total:
                    clean[mono] = total
                else:
                    clean.pop(mono, None)
        self.context = context
        self._terms = clean
        self._hash = None

    @staticmethod
    def _check_monomial(ctx, mono):
        if isinstance(mono, Mapping):
            mono = tuple(mono.items())
        exps = {}
        for key, e in mono:
            i = ctx.index(key) if not isinstance(key, int) else key
            if e < 0:
                raise GradedAlgebraError("negative exponent")
            if e:
                exps[i] = exps.get(i, 0) + e
        for i, e in exps.items():
            if ctx.parities[i] and e > 1:
                return None
        return tuple(sorted(exps.items()))

    @classmethod
    def _raw(cls, context, terms):
        obj = cls.__new__(cls)
        obj.context = context
        obj._terms = terms
        obj._hash = None
        return obj

    # -- basic protocol ---------------------------------------------------

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.context.const(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.context == other.context and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.context, frozenset(self._terms.items())))
        return self._hash

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.context != self.context:
                raise ContextMismatch("polynomials live in different contexts")
            return other
        if isinstance(other, (int, Fraction)):
            return self.context.const(other)
        raise TypeError(f"cannot combine Polynomial with {type(other).__name__}")

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        if not other._terms:
            return self
        out = dict(self._terms)
        for m, c in other._terms.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                del out[m]
        return Polynomial._raw(self.context, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw(self.context, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return self.context.zero
            return Polynomial._raw(self.context, {m: c * other for m, c in self._terms.items()})
        if not isinstance(other, Polynomial):
            return NotImplemented
        return poly_mul(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * other
        return NotImplemented

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise GradedAlgebraError("exponent must be a non-negative integer")
        result = self.context.one
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- grading ----------------------------------------------------------

    @property
    def parity(self) -> Optional[int]:
        """Common parity of all terms (EVEN for zero), None if mixed."""
        ps = {self.context.mono_parity(m) for m in self._terms}
        if len(ps) > 1:
            return None
        return ps.pop() if ps else EVEN

    @property
    def weight(self) -> Optional[int]:
        """Common weight of all terms (0 for zero), None if mixed."""
        ws = {self.context.mono_weight(m) for m in self._terms}
        if len(ws) > 1:
            return None
        return ws.pop() if ws else 0

    def weights(self) -> set:
        return {self.context.mono_weight(m) for m in self._terms}

    def homogeneous_component(self, w: int) -> "Polynomial":
        ctx = self.context
        return Polynomial._raw(
            ctx, {m: c for m, c in self._terms.items() if ctx.mono_weight(m) == w}
        )

    def parity_component(self, p: int) -> "Polynomial":
        ctx = self.context
        return Polynomial._raw(
            ctx, {m: c for m, c in self._terms.items() if ctx.mono_parity(m) == p}
        )

    def constant_term(self) -> Fraction:
        return self._terms.get(ONE, Fraction(0))

    def at_origin(self) -> "Polynomial":
        """Set every coordinate of nonzero weight to zero."""
        w = self.context.weights
        return Polynomial._raw(
            self.context,
            {m: c for m, c in self._terms.items() if all(w[i] == 0 for i, _ in m)},
        )

    def degree(self) -> int:
        return max((sum(e for _, e in m) for m in self._terms), default=0)

    def variables(self) -> set:
        return {self.context.coordinates[i].name for m in self._terms for i, _ in m}

    # -- calculus ---------------------------------------------------------

    def partial(self, name) -> "Polynomial":
        return partial_derivative(self, name)

    def substitute(self, mapping, target: Optional[GradedContext] = None) -> "Polynomial":
        return substitute(self, mapping, target)

    # -- printing ---------------------------------------------------------

    def sorted_terms(self):
        key = self.context.mono_key
        return sorted(self._terms.items(), key=lambda mc: key(mc[0]))

    def __str__(self):
        if not self._terms:
            return "0"
        ctx = self.context
        out = []
        for k, (m, c) in enumerate(self.sorted_terms()):
            neg = c < 0
            a = -c if neg else c
            mono = ctx.format_monomial(m)
            if not mono:
                body = _fmt_coeff(a)
            elif a == 1:
                body = mono
            else:
                body = f"{_fmt_coeff(a)}*{mono}"
            if k == 0:
                out.append(f"-{body}" if neg else body)
            else:
                out.append(f" - {body}" if neg else f" + {body}")
        return "".join(out)

    def __repr__(self):
        return f"Polynomial({self})"


def poly_mul(f: Polynomial, g: Polynomial) -> Polynomial:
    """Supercommutative product ``f*g`` with Koszul signs."""
    if f.context != g.context:
        raise ContextMismatch("polynomials live in different contexts")
    ctx = f.context
    if not f._terms or not g._terms:
        return ctx.zero
    out: dict = {}
    mul = ctx.mono_mul
    for m1, c1 in f._terms.items():
        for m2, c2 in g._terms.items():
            r = mul(m1, m2)
            if r is None:
                continue
            sign, m = r
            c = c1 * c2 if sign > 0 else -(c1 * c2)
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                del out[m]
    _guard(len(out))
    return Polynomial._raw(ctx, out)


def partial_derivative(f: Polynomial, c) -> Polynomial:
    """Left partial derivative of ``f`` with respect to coordinate ``c``."""
    ctx = f.context
    k = ctx.index(c)
    par = ctx.parities
    odd = par[k]
    out: dict = {}
    for m, coeff in f._terms.items():
        for pos, (i, e) in enumerate(m):
            if i != k:
                continue
            if odd:
                passed = sum(par[j] for j, _ in m[:pos]) & 1
                newm = m[:pos] + m[pos + 1:]
                val = -coeff if passed else coeff
            else:
                newm = m[:pos] + ((i, e - 1),) + m[pos + 1:] if e > 1 else m[:pos] + m[pos + 1:]
                val = coeff * e
            s = out.get(newm, 0) + val
            if s:
                out[newm] = s
            else:
                del out[newm]
            break
    return Polynomial._raw(ctx, out)


def homogeneous_component(f: Polynomial, w: int) -> Polynomial:
    return f.homogeneous_component(w)


def parity_weight(f: Polynomial) -> Optional[Tuple[int, int]]:
    """``(parity, weight)`` if every term agrees on both, otherwise None."""
    p, w = f.parity, f.weight
    if p is None or w is None:
        return None
    return p, w


def substitute(
    f: Polynomial,
    mapping: Mapping,
    target: Optional[GradedContext] = None,
) -> Polynomial:
    """Apply the algebra morphism sending each coordinate ``c`` to ``mapping[c]``.

    ``mapping`` is keyed by coordinate name (or Coordinate). Its values are
    polynomials in ``target`` (by default the context of ``f``). Every
    coordinate that occurs in ``f`` must be mapped, to a polynomial of the same
    parity.
    """
    src = f.context
    images = {}
    for key, val in mapping.items():
        name = key.name if isinstance(key, Coordinate) else key
        if name not in src:
            raise UnknownCoordinate(f"substitution for unknown coordinate {name!r}")
        images[src.index(name)] = val
    if target is None:
        vals = [v for v in images.values() if isinstance(v, Polynomial)]
        target = vals[0].context if vals else src
    for i, val in list(images.items()):
        if isinstance(val, (int, Fraction)):
            val = images[i] = target.const(val)
        if val.context != target:
            raise ContextMismatch("substitution values live in different contexts")
        p = val.parity
        if p is None or (val and p != src.parities[i]):
            raise ParityMismatch(
                f"cannot substitute a polynomial of parity {p} for "
                f"{src.coordinates[i].name} (parity {src.parities[i]})"
            )
    powers: dict = {}
    result = target.zero
    for m, coeff in f.sorted_terms():
        term = target.const(coeff)
        for i, e in m:
            if i not in images:
                raise UnknownCoordinate(
                    f"no substitution given for {src.coordinates[i].name!r}"
                )
            key = (i, e)
            if key not in powers:
                powers[key] = images[i] ** e
            term = term * powers[key]
            if not term:
                break
        result = result + term
    _guard(len(result))
    return result
