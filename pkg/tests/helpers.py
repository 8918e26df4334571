"""Seeded random generators shared by the property and acceptance suites."""

import random
from fractions import Fraction

from qmk import Coordinate, GradedContext, Polynomial, VectorField


def random_context(rng: random.Random, n_min=2, n_max=5, max_weight=2) -> GradedContext:
    n = rng.randint(n_min, n_max)
    return GradedContext(
        Coordinate(f"c{i}", rng.randint(0, 1), rng.randint(0, max_weight)) for i in range(n)
    )


def random_coeff(rng):
    return Fraction(rng.randint(-4, 4), rng.choice([1, 1, 1, 2, 3]))


def random_poly(rng, ctx, terms=4, max_deg=3) -> Polynomial:
    out = ctx.zero
    for _ in range(rng.randint(0, terms)):
        mono = {}
        for _ in range(rng.randint(0, max_deg)):
            i = rng.randrange(len(ctx))
            mono[i] = mono.get(i, 0) + 1
        out = out + Polynomial(ctx, {tuple(mono.items()): random_coeff(rng)})
    return out


def random_homogeneous(rng, ctx, parity, weight=None, terms=3, max_deg=3, tries=60) -> Polynomial:
    """Sum of random monomials of the requested parity (and weight, if given)."""
    out = ctx.zero
    for _ in range(terms):
        for _ in range(tries):
            mono = {}
            for _ in range(rng.randint(0, max_deg)):
                i = rng.randrange(len(ctx))
                mono[i] = mono.get(i, 0) + 1
            t = Polynomial(ctx, {tuple(mono.items()): random_coeff(rng) or 1})
            if t and t.parity == parity and (weight is None or t.weight == weight):
                out = out + t
                break
    return out


def random_field(rng, ctx, parity, weight=None, terms=2) -> VectorField:
    comps = {}
    for c in ctx:
        if rng.random() < 0.6:
            w = None if weight is None else c.weight + weight
            comps[c.name] = random_homogeneous(rng, ctx, (parity + c.parity) & 1, w, terms)
    return VectorField(ctx, comps)
