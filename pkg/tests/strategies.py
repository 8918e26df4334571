
from hypothesis import strategies as st

from qmk import Coordinate, GradedContext, Polynomial, VectorField

coeffs = st.fractions(min_value=-5, max_value=5, max_denominator=4)


@st.composite
def contexts(draw, min_size=2, max_size=5, max_weight=2):
    n = draw(st.integers(min_size, max_size))
    return GradedContext(
        Coordinate(f"c{i}", draw(st.integers(0, 1)), draw(st.integers(0, max_weight)))
        for i in range(n)
    )


@st.composite
def monomials(draw, ctx, max_deg=3):
    idx = draw(st.lists(st.integers(0, len(ctx) - 1), max_size=max_deg))
    mono = {}
    for i in idx:
        mono[i] = mono.get(i, 0) + 1
    return tuple(mono.items())


@st.composite
def polynomials(draw, ctx, max_terms=4, max_deg=3):
    terms = draw(st.lists(st.tuples(monomials(ctx, max_deg), coeffs), max_size=max_terms))
    return Polynomial(ctx, terms)


@st.composite
def homogeneous_polynomials(draw, ctx, parity=None, max_terms=3, max_deg=3):
    """A polynomial whose terms all share one parity and one weight."""
    first = draw(monomials(ctx, max_deg))
    p = ctx.mono_parity(first) if parity is None else parity
    w = ctx.mono_weight(first)
    out = Polynomial(ctx, {first: draw(coeffs.filter(bool))}) if ctx.mono_parity(first) == p else ctx.zero
    for m in draw(st.lists(monomials(ctx, max_deg), max_size=max_terms)):
        if ctx.mono_parity(m) == p and ctx.mono_weight(m) == w:
            out = out + Polynomial(ctx, {m: draw(coeffs)})
    return out


@st.composite
def parity_fields(draw, ctx, parity, max_terms=2):
    """Random vector field of the given parity (weights unconstrained)."""
    comps = {}
    for c in ctx:
        if draw(st.booleans()):
            target = (parity + c.parity) & 1
            terms = draw(st.lists(monomials(ctx), max_size=max_terms))
            comp = ctx.zero
            for m in terms:
                if ctx.mono_parity(m) == target:
                    comp = comp + Polynomial(ctx, {m: draw(coeffs)})
            comps[c.name] = comp
    return VectorField(ctx, comps)
