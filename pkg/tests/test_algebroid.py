import itertools
import random

import pytest

from qmk import EVEN, ODD, GradedContext, HigherAlgebroid, VectorField, derived_bracket2, is_homological
from qmk.algebroid import (
    AlgebroidChart,
    AlgebroidError,
    Section,
    algebroid_anchor,
    algebroid_bracket,
    check_algebroid_morphism,
    embed_section,
    extract_section,
    verify_algebroid_axioms,
)
from qmk.fixtures import (
    abelian_chart,
    affine_line_algebroid,
    broken_anchor_algebroid,
    corrupted_lie_algebra,
    mixed_chart,
    nonabelian_2d,
    sl2_line_algebroid,
    so3,
    tangent_algebroid,
)
from qmk.graded_algebra import partial_derivative


def super_lie_chart():
    """One even and one odd generator with [f, f] proportional to e."""
    c = GradedContext.of(("xi", ODD, 1), ("eta", EVEN, 1))
    return VectorField(c, {"xi": c.var("eta") ** 2})


GOOD = {
    "tangent": tangent_algebroid,
    "nonabelian": nonabelian_2d,
    "nonabelian3": lambda: nonabelian_2d(3),
    "so3": so3,
    "abelian": abelian_chart,
    "affine_line": affine_line_algebroid,
    "sl2_line": sl2_line_algebroid,
    "super_lie": super_lie_chart,
}
BAD = {
    "corrupted": corrupted_lie_algebra,
    "broken_anchor": broken_anchor_algebroid,
}


def sign(n):
    return -1 if n % 2 else 1


# -- sections ---------------------------------------------------------------------


def test_chart_validation():
    with pytest.raises(AlgebroidError):
        AlgebroidChart(mixed_chart())
    c = GradedContext.of(("x", EVEN, 0), ("xi", ODD, 1))
    with pytest.raises(AlgebroidError):
        AlgebroidChart(VectorField(c, {"xi": c.var("x") * c.var("xi")}))  # weight 0
    C = AlgebroidChart(tangent_algebroid())
    assert C.base == ["x"] and C.fibers == ["xi"]


def test_section_parity():
    c = GradedContext.of(("x", EVEN, 0), ("xi", ODD, 1), ("eta", EVEN, 1))
    assert Section(c, {"xi": 1}).parity == EVEN
    assert Section(c, {"eta": 1}).parity == ODD
    with pytest.raises(AlgebroidError):
        Section(c, {"xi": 1, "eta": 1})
    with pytest.raises(AlgebroidError):
        Section(c, {"xi": 1}, ODD)
    with pytest.raises(AlgebroidError):
        Section(c, {"xi": c.var("xi")})  # weight 1 coefficient
    with pytest.raises(AlgebroidError):
        Section(c, {"x": 1})


def test_embed_examples():
    c = GradedContext.of(("x", EVEN, 0), ("xi", ODD, 1), ("eta", EVEN, 1))
    x = c.var("x")
    d_xi = VectorField.partial(c, "xi")
    d_eta = VectorField.partial(c, "eta")
    assert embed_section(Section(c, {"xi": 1})) == d_xi
    assert embed_section(Section(c, {"eta": 1})) == -d_eta
    assert not embed_section(Section(c))
    f = x * x + 1
    assert embed_section(f * Section(c, {"xi": 1})) == f * d_xi
    assert str(f * Section(c, {"xi": 1})) == "(1 + x^2)*e_xi"
    with pytest.raises(AlgebroidError):
        extract_section(VectorField.partial(c, "x"))
    with pytest.raises(AlgebroidError):
        extract_section(c.var("xi") * d_xi)


def test_embed_extract_round_trip():
    rng = random.Random(11)
    c = GradedContext.of(("x", EVEN, 0), ("y", EVEN, 0), ("xi", ODD, 1), ("eta", EVEN, 1))
    x, y = c.vars("x", "y")
    pool = [c.one, x, y, x * y, x * x - 3 * y]
    for _ in range(50):
        a, b = rng.choice(pool) * rng.randint(-3, 3), rng.choice(pool) * rng.randint(-3, 3)
        X = VectorField(c, {"xi": a}) if rng.random() < 0.5 else VectorField(c, {"eta": b})
        assert embed_section(extract_section(X)) == X
        u = extract_section(X)
        assert extract_section(embed_section(u)) == u


# -- bracket and anchor -----------------------------------------------------------------


def test_nonabelian_bracket():
    for k in (1, 3, -2):
        C = AlgebroidChart(nonabelian_2d(k))
        e1, e2 = C.basis_sections()
        assert algebroid_bracket(C, e1, e2) == k * e1
        assert algebroid_bracket(C, e2, e1) == -k * e1
        assert not algebroid_bracket(C, e1, e1)


def test_so3_bracket():
    C = AlgebroidChart(so3())
    e1, e2, e3 = C.basis_sections()
    assert algebroid_bracket(C, e1, e2) == e3
    assert algebroid_bracket(C, e2, e3) == e1
    assert algebroid_bracket(C, e3, e1) == e2


def test_odd_section_bracket():
    C = AlgebroidChart(super_lie_chart())
    e, f = C.basis_sections()
    assert f.parity == ODD
    assert algebroid_bracket(C, f, f) == -2 * e
    assert not algebroid_bracket(C, e, f)


@pytest.mark.parametrize("name", sorted(GOOD))
def test_basis_structure_constants(name):
    """[e_i, e_j] = (-1)^|e_j| Q^k_ij e_k with Q^k_ij = d_i d_j Q^k and
    a(e_i) = Q^a_i d_a with Q^a_i = d_i Q^a."""
    C = AlgebroidChart(GOOD[name]())
    Q = C.Q
    for i, j in itertools.product(C.fibers, repeat=2):
        ej = C.basis_section(j)
        expect = {}
        for k in C.fibers:
            q = partial_derivative(partial_derivative(Q.component(k), j), i)
            if q:
                expect[k] = sign(ej.parity) * q
        assert algebroid_bracket(C, C.basis_section(i), ej).components == expect
    for i in C.fibers:
        got = algebroid_anchor(C, C.basis_section(i))
        for a in C.base:
            assert got.component(a) == partial_derivative(Q.component(a), i)


def test_anchor_examples():
    C = AlgebroidChart(tangent_algebroid())
    (e,) = C.basis_sections()
    assert algebroid_anchor(C, e) == VectorField.partial(C.context, "x")
    assert not algebroid_anchor(C, Section(C.context))
    C = AlgebroidChart(affine_line_algebroid())
    x = C.context.var("x")
    e1, e2 = C.basis_sections()
    for f in (x, x * x - 1):
        assert algebroid_anchor(C, f * e2) == f * algebroid_anchor(C, e2)
        assert algebroid_anchor(C, f * e2) == VectorField(C.context, {"x": f * x})


def test_leibniz_example():
    C = AlgebroidChart(affine_line_algebroid())
    x = C.context.var("x")
    e1, e2 = C.basis_sections()
    f = x * x
    lhs = algebroid_bracket(C, e1, f * e2)
    rhs = algebroid_anchor(C, e1)(f) * e2 + f * algebroid_bracket(C, e1, e2)
    assert lhs == rhs
    assert lhs == 2 * x * e2 + f * e1


@pytest.mark.parametrize("name", sorted(GOOD))
def test_bracket_matches_derived_bracket(name):
    Q = GOOD[name]()
    C = AlgebroidChart(Q)
    A = HigherAlgebroid(Q)
    x = [C.context.one] + [C.context.var(a) for a in C.base]
    secs = [f * e for f in x for e in C.basis_sections()]
    for u, v in itertools.product(secs, repeat=2):
        b = derived_bracket2(A, embed_section(u), embed_section(v))
        assert embed_section(algebroid_bracket(C, u, v)) == sign(u.parity) * b


# -- axioms ---------------------------------------------------------------------------


@pytest.mark.parametrize("name", sorted(GOOD))
def test_good_charts_pass(name):
    C = AlgebroidChart(GOOD[name]())
    rep = verify_algebroid_axioms(C)
    assert rep.ok, rep.lines()
    assert [r.name for r in rep.results] == [
        "antisymmetry", "jacobi", "leibniz", "anchor_linearity", "anchor_homomorphism", "homological"]


def test_corrupted_lie_algebra_fails():
    rep = verify_algebroid_axioms(AlgebroidChart(corrupted_lie_algebra()))
    assert not rep.ok
    assert not rep["jacobi"].ok and not rep["homological"].ok
    assert rep["antisymmetry"].ok and rep["leibniz"].ok
    assert rep["jacobi"].line().startswith("AXIOM jacobi FAIL u=")
    d = rep.to_dict()
    assert d["ok"] is False and d["axioms"][1]["status"] == "FAIL"


def test_broken_anchor_fails():
    rep = verify_algebroid_axioms(AlgebroidChart(broken_anchor_algebroid()))
    assert not rep["anchor_homomorphism"].ok
    assert not rep["jacobi"].ok
    assert not rep["homological"].ok


def test_abelian_chart_trivial():
    C = AlgebroidChart(abelian_chart())
    for u, v in itertools.product(C.basis_sections(), repeat=2):
        assert not algebroid_bracket(C, u, v)
        assert not algebroid_anchor(C, u)


@pytest.mark.parametrize("name", sorted(GOOD) + sorted(BAD))
def test_homological_iff_axioms(name):
    Q = {**GOOD, **BAD}[name]()
    assert bool(is_homological(Q)) == verify_algebroid_axioms(AlgebroidChart(Q)).ok


def test_homological_iff_axioms_random_ce():
    """Random structure constants: Jacobi holds iff Q is homological."""
    from qmk.fixtures import lie_algebroid_field

    c = GradedContext.of(("xi1", ODD, 1), ("xi2", ODD, 1), ("xi3", ODD, 1))
    rng = random.Random(5)
    seen = set()
    for _ in range(25):
        consts = {p: {k: rng.choice([0, 0, 1, -1]) for k in range(3)} for p in ((0, 1), (0, 2), (1, 2))}
        Q = lie_algebroid_field(c, ["xi1", "xi2", "xi3"], consts)
        hq = bool(is_homological(Q))
        seen.add(hq)
        assert hq == verify_algebroid_axioms(AlgebroidChart(Q)).ok
    assert seen == {True, False}


# -- morphisms ----------------------------------------------------------------------------


def test_identity_morphism():
    for make in GOOD.values():
        C = AlgebroidChart(make())
        assert check_algebroid_morphism(C, C, {n: C.context.var(n) for n in C.context.names})


def test_so3_cyclic_automorphism():
    C = AlgebroidChart(so3())
    x1, x2, x3 = C.context.vars("xi1", "xi2", "xi3")
    assert check_algebroid_morphism(C, C, {"xi1": x2, "xi2": x3, "xi3": x1})
    # a swap reverses orientation and is not an automorphism
    assert not check_algebroid_morphism(C, C, {"xi1": x2, "xi2": x1, "xi3": x3})


def test_nonabelian_scalings():
    C = AlgebroidChart(nonabelian_2d())
    x1, x2 = C.context.vars("xi1", "xi2")
    # e1 -> 2 e1 preserves [e1, e2] = e1
    assert check_algebroid_morphism(C, C, {"xi1": 2 * x1, "xi2": x2})
    res = check_algebroid_morphism(C, C, {"xi1": x1, "xi2": 2 * x2})
    assert not res
    assert res.residuals


def test_morphism_weight_check():
    C = AlgebroidChart(tangent_algebroid())
    x, xi = C.context.vars("x", "xi")
    with pytest.raises(AlgebroidError):
        check_algebroid_morphism(C, C, {"x": xi, "xi": xi})


def test_anchor_into_tangent_is_morphism():
    """The anchor of the affine line algebroid as a map to the tangent algebroid."""
    C1 = AlgebroidChart(affine_line_algebroid())
    C2 = AlgebroidChart(tangent_algebroid())
    x, xi1, xi2 = C1.context.vars("x", "xi1", "xi2")
    assert check_algebroid_morphism(C1, C2, {"x": x, "xi": xi1 + x * xi2})
    assert not check_algebroid_morphism(C1, C2, {"x": x, "xi": xi1})
