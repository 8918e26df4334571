"""Lie algebroids as weight-one homological fields on a degree-one chart.

Sections ``u = u^k e_k`` are identified with weight ``-1`` fields through
``i_u = (-1)^|u| u^k d/dxi^k``; bracket and anchor are read off from ``Q``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence

from .graded_algebra import EVEN, GradedContext, Polynomial
from .vector_fields import (
    RelatednessCheck,
    VectorField,
    VectorFieldError,
    check_f_related,
    commutator,
    homogeneous_parity,
    is_homological,
)


class AlgebroidError(VectorFieldError):
    pass


def _sign(n: int) -> int:
    return -1 if n & 1 else 1


class AlgebroidChart:
    """A chart with base coordinates of weight 0, fiber coordinates of weight 1
    and an odd weight-1 field ``Q`` (not necessarily homological)."""

    def __init__(self, Q: VectorField, name: str = "Q"):
        ctx = Q.context
        bad = [c.name for c in ctx if c.weight not in (0, 1)]
        if bad:
            raise AlgebroidError(
                f"algebroid charts need weights 0 and 1 only; offending coordinates: {', '.join(bad)}"
            )
        if Q:
            if homogeneous_parity(Q) != 1 or Q.weight != 1:
                raise AlgebroidError("Q must be odd and of weight 1")
        self.Q = Q
        self.name = name
        self.context = ctx
        self.base = [c.name for c in ctx if c.weight == 0]
        self.fibers = [c.name for c in ctx if c.weight == 1]

    def basis_section(self, fiber) -> "Section":
        ctx = self.context
        return Section(ctx, {fiber: ctx.one}, ctx[fiber].parity ^ 1)

    def basis_sections(self) -> List["Section"]:
        return [self.basis_section(k) for k in self.fibers]

    def __repr__(self):
        return f"AlgebroidChart({self.name} = {self.Q})"


class Section:
    """``u^k e_k`` with weight-0 coefficients.

    The basis section ``e_k`` has the parity opposite to the fiber
    coordinate ``xi^k``; ``parity`` is the declared parity of the whole
    section and must match every nonzero term.
    """

    def __init__(self, context: GradedContext, components: Mapping = (), parity: Optional[int] = None):
        comps: Dict[str, Polynomial] = {}
        items = components.items() if isinstance(components, Mapping) else components
        for k, v in items:
            name = context[k].name
            if context[name].weight != 1:
                raise AlgebroidError(f"{name} is not a fiber coordinate")
            if not isinstance(v, Polynomial):
                v = context.const(v)
            if not v:
                continue
            if v.weights() != {0}:
                raise AlgebroidError(f"coefficient of e_{name} must have weight 0, got {v}")
            p = v.parity
            if p is None:
                raise AlgebroidError(f"coefficient of e_{name} has mixed parity")
            term_parity = p ^ context[name].parity ^ 1
            if parity is None:
                parity = term_parity
            elif parity != term_parity:
                raise AlgebroidError(f"term {v}*e_{name} does not have the declared parity {parity}")
            comps[name] = v
        self.context = context
        self.parity = EVEN if parity is None else parity
        self._comp = {n: comps[n] for n in context.names if n in comps}

    @property
    def components(self) -> Dict[str, Polynomial]:
        return dict(self._comp)

    def __bool__(self):
        return bool(self._comp)

    def __eq__(self, other):
        if not isinstance(other, Section):
            return NotImplemented
        if self.context != other.context or self._comp != other._comp:
            return False
        return not self._comp or self.parity == other.parity

    def __hash__(self):
        return hash(tuple(self._comp.items()))

    def __add__(self, other: "Section") -> "Section":
        if not other:
            return self
        if not self:
            return other
        out = dict(self._comp)
        for k, v in other._comp.items():
            out[k] = out.get(k, self.context.zero) + v
        return Section(self.context, out, self.parity if self.parity == other.parity else None)

    def __neg__(self):
        return Section(self.context, {k: -v for k, v in self._comp.items()}, self.parity)

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, f):
        if not isinstance(f, Polynomial):
            f = self.context.const(f)
        if not f:
            return Section(self.context, {}, self.parity)
        return Section(self.context, {k: f * v for k, v in self._comp.items()},
                       (self.parity + (f.parity or 0)) & 1)

    def __str__(self):
        if not self._comp:
            return "0"
        parts = []
        for k, v in self._comp.items():
            s = str(v)
            if s == "1":
                parts.append(f"e_{k}")
            elif s == "-1":
                parts.append(f"-e_{k}")
            else:
                parts.append(f"{s}*e_{k}" if len(v) == 1 else f"({s})*e_{k}")
        return " + ".join(parts).replace("+ -", "- ")

    __repr__ = __str__


def embed_section(u: Section) -> VectorField:
    """``i_u = (-1)^|u| u^k d/dxi^k``."""
    s = _sign(u.parity)
    return VectorField(u.context, {k: s * v for k, v in u._comp.items()})


def extract_section(X: VectorField) -> Section:
    """Inverse of :func:`embed_section` on weight ``-1`` fields."""
    if not X:
        return Section(X.context)
    ctx = X.context
    if X.weights() != {-1}:
        raise AlgebroidError(f"not a field of weight -1: {X}")
    for name in X.components:
        if ctx[name].weight != 1:
            raise AlgebroidError(f"field has a component along {name}, not a fiber")
    parity = homogeneous_parity(X) ^ 1
    s = _sign(parity)
    return Section(ctx, {k: s * v for k, v in X.components.items()}, parity)


def _chart_of(u: Section, C: AlgebroidChart):
    if u.context != C.context:
        raise AlgebroidError("section lives on another chart")


def algebroid_bracket(C: AlgebroidChart, u: Section, v: Section) -> Section:
    """The section with ``i_[u,v] = (-1)^|u| [[Q, i_u], i_v]``."""
    _chart_of(u, C)
    _chart_of(v, C)
    X = commutator(commutator(C.Q, embed_section(u)), embed_section(v))
    X = _sign(u.parity) * X
    if X and X.weights() != {-1}:
        raise AlgebroidError(f"bracket left the weight -1 fields: {X}")
    s = extract_section(X)
    return s if s else Section(C.context, {}, (u.parity + v.parity) & 1)


def algebroid_anchor(C: AlgebroidChart, u: Section) -> VectorField:
    """``a(u)`` as a field on the base: ``a(u) f = [[Q, i_u], f]``."""
    _chart_of(u, C)
    D = commutator(C.Q, embed_section(u))
    return VectorField(C.context, {a: D.component(a) for a in C.base if D.component(a)})


# --------------------------------------------------------------------------
# axioms


@dataclass
class AxiomResult:
    name: str
    checked: int = 0
    failures: int = 0
    args: Optional[dict] = None
    residual: object = None

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def line(self) -> str:
        if self.ok:
            return f"AXIOM {self.name} OK"
        args = " ".join(f"{k}={v}" for k, v in self.args.items())
        return f"AXIOM {self.name} FAIL {args} residual={self.residual}"

    def to_dict(self) -> dict:
        d = {"axiom": self.name, "status": "OK" if self.ok else "FAIL",
             "checked": self.checked, "failures": self.failures}
        if not self.ok:
            d["args"] = {k: str(v) for k, v in self.args.items()}
            d["residual"] = str(self.residual)
        return d


@dataclass
class AxiomReport:
    results: List[AxiomResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results)

    def __getitem__(self, name) -> AxiomResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    def lines(self) -> List[str]:
        return [r.line() for r in self.results]

    def __str__(self):
        return "\n".join(self.lines())

    def to_dict(self) -> dict:
        return {"ok": self.ok, "axioms": [r.to_dict() for r in self.results]}


def default_multipliers(C: AlgebroidChart) -> List[Polynomial]:
    """``1``, the base coordinates and their pairwise products."""
    ctx = C.context
    xs = [ctx.var(a) for a in C.base]
    out = [ctx.one] + xs
    for a, b in itertools.combinations_with_replacement(xs, 2):
        p = a * b
        if p:
            out.append(p)
    return out


def _run(name, roles, fn, pools) -> AxiomResult:
    res = AxiomResult(name)
    for args in itertools.product(*pools):
        res.checked += 1
        r = fn(*args)
        if r:
            res.failures += 1
            if res.args is None:
                res.args = dict(zip(roles, args))
                res.residual = r
    return res


def verify_algebroid_axioms(C: AlgebroidChart, multipliers: Optional[Sequence[Polynomial]] = None) -> AxiomReport:
    """Check the Lie algebroid axioms on basis sections times multipliers.

    Antisymmetry and Jacobi run over sections ``m e_k``; the Leibniz rule
    and function-linearity of the anchor over basis sections and every
    multiplier. Also checks ``[Q, Q] = 0`` and that the anchor maps
    brackets to commutators.
    """
    fs = list(multipliers) if multipliers is not None else default_multipliers(C)
    basis = C.basis_sections()
    secs = [f * e for f in fs[: 1 + len(C.base)] for e in basis]
    br = lambda u, v: algebroid_bracket(C, u, v)
    an = lambda u: algebroid_anchor(C, u)

    def antisym(u, v):
        return br(u, v) + _sign(u.parity * v.parity) * br(v, u)

    def jacobi(u, v, w):
        return br(u, br(v, w)) - br(br(u, v), w) - _sign(u.parity * v.parity) * br(v, br(u, w))

    def leibniz(u, f, v):
        af = an(u)(f)
        rhs = (af * v) + _sign(u.parity * (f.parity or 0)) * (f * br(u, v))
        return br(u, f * v) - rhs

    def anchor_linear(f, u):
        return an(f * u) - f * an(u)

    def anchor_hom(u, v):
        return an(br(u, v)) - commutator(an(u), an(v))

    results = [
        _run("antisymmetry", ("u", "v"), antisym, [secs, secs]),
        _run("jacobi", ("u", "v", "w"), jacobi, [secs, secs, secs]),
        _run("leibniz", ("u", "f", "v"), leibniz, [basis, fs, basis]),
        _run("anchor_linearity", ("f", "u"), anchor_linear, [fs, basis]),
        _run("anchor_homomorphism", ("u", "v"), anchor_hom, [secs, secs]),
    ]
    hq = is_homological(C.Q)
    hres = AxiomResult("homological", checked=1)
    if not hq:
        hres.failures = 1
        hres.args = {"witness": hq.witness}
        hres.residual = hq.witness_component
    results.append(hres)
    return AxiomReport(results)


def check_algebroid_morphism(C1: AlgebroidChart, C2: AlgebroidChart, sigma: Mapping) -> RelatednessCheck:
    """``sigma`` sends each coordinate of ``C2`` to a polynomial on ``C1``;
    it is an algebroid morphism iff ``C1.Q`` and ``C2.Q`` are related."""
    for c in C2.context:
        img = sigma.get(c.name)
        if isinstance(img, Polynomial) and img and img.weights() != {c.weight}:
            raise AlgebroidError(f"image of {c.name} does not have weight {c.weight}")
    return check_f_related(sigma, C1.Q, C2.Q)
