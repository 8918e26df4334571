from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

import oracle
from strategies import contexts, homogeneous_polynomials, polynomials
from qmk import EVEN, ODD, Coordinate, GradedContext, partial_derivative, substitute
from qmk.graded_algebra import (
    ContextMismatch,
    GradedAlgebraError,
    ParityMismatch,
    TermLimitExceeded,
    UnknownCoordinate,
    parity_weight,
)


@pytest.fixture
def ctx():
    return GradedContext.of(("x", EVEN, 0), ("t1", ODD, 1), ("t2", ODD, 1), ("y", ODD, 1), ("z", EVEN, 2))


# -- construction -------------------------------------------------------------


def test_coordinate_validation():
    with pytest.raises(GradedAlgebraError):
        Coordinate("x", 2, 0)
    with pytest.raises(GradedAlgebraError):
        Coordinate("1x", EVEN, 0)
    with pytest.raises(GradedAlgebraError):
        Coordinate("x", EVEN, 0.5)
    assert Coordinate("w", ODD, -3).weight == -3


def test_duplicate_names_rejected():
    with pytest.raises(GradedAlgebraError):
        GradedContext.of(("x", EVEN, 0), ("x", ODD, 1))


def test_degree_N(ctx):
    assert ctx.degree_N == 2
    assert GradedContext.of(("a", EVEN, -1)).degree_N is None
    assert GradedContext([]).degree_N == 0


def test_unknown_coordinate(ctx):
    with pytest.raises(UnknownCoordinate):
        ctx.var("nope")
    with pytest.raises(UnknownCoordinate):
        partial_derivative(ctx.var("x"), "nope")


def test_no_zero_coefficients_stored(ctx):
    x = ctx.var("x")
    f = x - x
    assert f == 0 and len(f) == 0 and f.terms == {}


# -- products -------------------------------------------------------------------


def test_odd_square_vanishes(ctx):
    t1 = ctx.var("t1")
    assert t1 * t1 == 0


def test_koszul_transposition(ctx):
    t1, t2 = ctx.vars("t1", "t2")
    assert t1 * t2 == -(t2 * t1)
    assert str(t2 * t1) == "-t1*t2"


def test_distributivity_example(ctx):
    x, t1, t2 = ctx.vars("x", "t1", "t2")
    assert str((x + t1 * t2) * x) == "x^2 + x*t1*t2"


def test_context_mismatch(ctx):
    other = GradedContext.of(("x", EVEN, 0))
    with pytest.raises(ContextMismatch):
        ctx.var("x") * other.var("x")


def test_normalized_printing():
    c = GradedContext.of(("y", EVEN, 1), ("z", EVEN, 2))
    y, z = c.vars("y", "z")
    assert str(Fraction(-3, 2) * y * z) == "-3/2*y*z"
    # terms ordered by weight first
    assert str(z + y + 1) == "1 + y + z"
    assert str(c.zero) == "0"


def test_power(ctx):
    x, t1 = ctx.vars("x", "t1")
    assert (x + 1) ** 2 == x * x + 2 * x + 1
    assert t1 ** 2 == 0
    assert t1 ** 0 == 1
    with pytest.raises(GradedAlgebraError):
        x ** -1


def test_term_limit(monkeypatch, ctx):
    monkeypatch.setenv("QMK_MAX_TERMS", "5")
    x, z = ctx.vars("x", "z")
    with pytest.raises(TermLimitExceeded) as exc:
        (x + z + 1) ** 4
    assert "QMK_MAX_TERMS" in str(exc.value)


# -- derivatives ----------------------------------------------------------------


def test_partial_examples(ctx):
    x, t1, t2 = ctx.vars("x", "t1", "t2")
    assert partial_derivative(t1, "t1") == 1
    assert partial_derivative(t1 * t2, "t1") == t2
    assert partial_derivative(t1 * t2, "t2") == -t1
    assert partial_derivative(x * x * t1, "x") == 2 * x * t1
    assert partial_derivative(x, "t1") == 0


def test_partial_matches_leibniz_on_example(ctx):
    # d_t2(t1 * t2) = d_t2(t1) t2 - t1 d_t2(t2)
    t1, t2 = ctx.vars("t1", "t2")
    rhs = partial_derivative(t1, "t2") * t2 - t1 * partial_derivative(t2, "t2")
    assert partial_derivative(t1 * t2, "t2") == rhs


# -- gradings -------------------------------------------------------------------


def test_homogeneous_components():
    c = GradedContext.of(("x", EVEN, 0), ("y", EVEN, 1), ("th", ODD, 1))
    x, y, th = c.vars("x", "y", "th")
    f = x + y * th
    assert f.homogeneous_component(0) == x
    assert f.homogeneous_component(2) == y * th
    assert f.homogeneous_component(1) == 0
    assert c.zero.homogeneous_component(3) == 0
    assert parity_weight(f) is None


def test_parity_weight_additivity():
    c = GradedContext.of(("y", ODD, 1), ("z", EVEN, 2))
    y, z = c.vars("y", "z")
    assert parity_weight(y * z) == (ODD, 3)


def test_at_origin_keeps_weight_zero_part(ctx):
    x, t1, z = ctx.vars("x", "t1", "z")
    assert (x * x + x * t1 + z).at_origin() == x * x


# -- substitution ---------------------------------------------------------------


def test_identity_substitution(ctx):
    x, t1, z = ctx.vars("x", "t1", "z")
    f = x * t1 + z * z
    assert substitute(f, {c.name: ctx.var(c.name) for c in ctx}) == f


def test_parity_mismatch(ctx):
    with pytest.raises(ParityMismatch):
        substitute(ctx.var("t1"), {"t1": ctx.var("x")})


def test_odd_square_in_substitution():
    old = GradedContext.of(("y", ODD, 1), ("z", EVEN, 2), ("T", EVEN, 0))
    y, z, T = old.vars("y", "z", "T")
    # z -> z + 1/2 y y T: the additive term is an odd square
    assert substitute(z, {"z": z + Fraction(1, 2) * y * y * T}) == z


def test_coordchange_quadratic_part():
    c = GradedContext.of(("y1", ODD, 1), ("y2", ODD, 1), ("z", EVEN, 2), ("T12", EVEN, 0), ("T21", EVEN, 0))
    y1, y2, z, T12, T21 = c.vars("y1", "y2", "z", "T12", "T21")
    # 1/2 (y1 y2 T21 + y2 y1 T12) with T12 = -T21 collapses to y1 y2 T21
    image = z + Fraction(1, 2) * (y1 * y2 * T21 + y2 * y1 * (-T21))
    assert image == z + y1 * y2 * T21
    assert str(image) == "z + y1*y2*T21"


# -- cross-checks against the naive oracle ---------------------------------------


@given(st.data())
def test_product_matches_oracle(data):
    c = data.draw(contexts())
    f = data.draw(polynomials(c))
    g = data.draw(polynomials(c))
    expect = oracle.multiply(oracle.to_words(f), oracle.to_words(g), c.parities)
    assert oracle.to_words(f * g) == expect


@given(st.data())
def test_partial_matches_oracle(data):
    c = data.draw(contexts())
    f = data.draw(polynomials(c))
    k = data.draw(st.integers(0, len(c) - 1))
    expect = oracle.left_derivative(oracle.to_words(f), k, c.parities)
    assert oracle.to_words(partial_derivative(f, c[k].name)) == expect


# -- properties ------------------------------------------------------------------


@given(st.data())
def test_supercommutativity(data):
    c = data.draw(contexts())
    f = data.draw(homogeneous_polynomials(c))
    g = data.draw(homogeneous_polynomials(c))
    pf, pg = f.parity or 0, g.parity or 0
    assert f * g == (-1) ** (pf * pg) * (g * f)


@given(st.data())
def test_associativity_distributivity(data):
    c = data.draw(contexts())
    f, g, h = (data.draw(polynomials(c)) for _ in range(3))
    assert (f * g) * h == f * (g * h)
    assert f * (g + h) == f * g + f * h


@given(st.data())
def test_derivatives_supercommute(data):
    c = data.draw(contexts())
    f = data.draw(polynomials(c))
    a, b = data.draw(st.integers(0, len(c) - 1)), data.draw(st.integers(0, len(c) - 1))
    pa, pb = c[a].parity, c[b].parity
    lhs = partial_derivative(partial_derivative(f, c[b].name), c[a].name)
    rhs = partial_derivative(partial_derivative(f, c[a].name), c[b].name)
    assert lhs == (-1) ** (pa * pb) * rhs


@given(st.data())
def test_leibniz_rule(data):
    c = data.draw(contexts())
    f = data.draw(homogeneous_polynomials(c))
    g = data.draw(polynomials(c))
    k = data.draw(st.integers(0, len(c) - 1))
    name = c[k].name
    sign = (-1) ** (c[k].parity * (f.parity or 0))
    assert partial_derivative(f * g, name) == partial_derivative(f, name) * g + sign * f * partial_derivative(g, name)


@given(st.data())
def test_weight_and_parity_additivity(data):
    c = data.draw(contexts())
    f = data.draw(homogeneous_polynomials(c))
    g = data.draw(homogeneous_polynomials(c))
    fg = f * g
    if fg:
        assert fg.weight == f.weight + g.weight
        assert fg.parity == (f.parity + g.parity) % 2


@given(st.data())
def test_substitution_is_multiplicative(data):
    c = data.draw(contexts())
    sigma = {}
    for coord in c:
        img = data.draw(homogeneous_polynomials(c, parity=coord.parity))
        sigma[coord.name] = img if img.parity in (coord.parity, None) or not img else c.zero
    f, g = data.draw(polynomials(c)), data.draw(polynomials(c))
    assert substitute(f * g, sigma) == substitute(f, sigma) * substitute(g, sigma)
    assert substitute(f + g, sigma) == substitute(f, sigma) + substitute(g, sigma)


@given(st.data())
def test_components_sum_back(data):
    c = data.draw(contexts())
    f = data.draw(polynomials(c))
    total = c.zero
    for w in f.weights():
        total = total + f.homogeneous_component(w)
    assert total == f
