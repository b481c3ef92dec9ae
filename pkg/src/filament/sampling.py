"""Seeded random curvature polynomials and fields for property checks.

Default policy: degree <= 4, derivative order <= 4, integer coefficients
in [-3, 3].  Arc-preserving fields are drawn by rejection: a candidate
normal part is kept only if ``k g`` turns out to be a total derivative.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .curvegeom import ArcPreservingField, VariationField, lift
from .diffalg import DiffPoly, NotExact, euler_derivative, total_derivative


def random_poly(rng: random.Random, max_terms: int = 4, max_degree: int = 4,
                max_order: int = 4, coeff_range: int = 3, g_power: int = 0,
                rational: bool = False, constant: bool = True) -> DiffPoly:
    acc: dict = {}
    for _ in range(rng.randint(1, max_terms)):
        degree = rng.randint(0 if constant else 1, max_degree)
        exps = [0] * (max_order + 1)
        for _ in range(degree):
            exps[rng.randint(0, max_order)] += 1
        c = 0
        while c == 0:
            c = rng.randint(-coeff_range, coeff_range)
        coeff = Fraction(c, rng.randint(1, 6)) if rational else Fraction(c)
        key = (rng.randint(0, g_power), tuple(exps))
        acc[key] = acc.get(key, 0) + coeff
    return DiffPoly(acc)


def random_exact(rng: random.Random, **kw) -> DiffPoly:
    """``D_s q`` for a random ``q``."""
    return total_derivative(random_poly(rng, **kw))


def random_non_exact(rng: random.Random, **kw) -> DiffPoly:
    """A random polynomial with nonzero Euler derivative or nonzero constant term."""
    while True:
        p = random_poly(rng, **kw)
        if p.constant_term() or euler_derivative(p):
            return p


# nested brackets roughly triple degree and order; keep Jacobi triples small
LOW_DEGREE = dict(max_degree=2, max_order=2, max_terms=3)


def random_field(rng: random.Random, **kw) -> VariationField:
    kw.setdefault("max_degree", 3)
    kw.setdefault("max_order", 3)
    kw.setdefault("max_terms", 3)
    return VariationField(random_poly(rng, **kw), random_poly(rng, **kw))


def random_arc_field(rng: random.Random, max_tries: int = 200, **kw) -> ArcPreservingField:
    """Random arc-preserving field.

    Half the draws use ``g = (dL/dk)'`` for random ``L`` (always liftable);
    the rest try ``g = p'`` for random ``p`` and discard non-liftable ones.
    """
    kw.setdefault("max_degree", 3)
    kw.setdefault("max_order", 2)
    kw.setdefault("max_terms", 3)
    for _ in range(max_tries):
        if rng.random() < 0.5:
            g = total_derivative(euler_derivative(random_poly(rng, **kw)))
        else:
            g = total_derivative(random_poly(rng, **kw))
        if g.is_zero:
            continue
        try:
            return lift(g)
        except NotExact:
            continue
    raise RuntimeError("rejection sampling found no arc-preserving field")
