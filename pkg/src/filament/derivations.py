"""Evolutionary derivations ``d_a = sum_m a^(m) d/dk^(m)`` and their Lie algebra."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .diffalg import (
    DiffPoly,
    Functional,
    euler_derivative,
    is_exact,
    total_derivative,
)


@dataclass(frozen=True)
class Characteristic:
    """The derivation determined by its value ``a`` on the generator ``k``."""

    a: DiffPoly

    def __call__(self, p: DiffPoly) -> DiffPoly:
        return apply(self, p)

    @property
    def is_zero(self) -> bool:
        return self.a.is_zero

    def __add__(self, other: "Characteristic") -> "Characteristic":
        return Characteristic(self.a + other.a)

    def __sub__(self, other: "Characteristic") -> "Characteristic":
        return Characteristic(self.a - other.a)

    def __neg__(self) -> "Characteristic":
        return Characteristic(-self.a)

    def __mul__(self, c) -> "Characteristic":
        return Characteristic(self.a * c)

    __rmul__ = __mul__

    def __str__(self) -> str:
        return str(self.a)


def _char(a) -> DiffPoly:
    return a.a if isinstance(a, Characteristic) else a


@lru_cache(maxsize=4096)
def prolong(a: DiffPoly, m: int) -> DiffPoly:
    """``D_s^m a``, memoised since commutators reuse the same prolongation."""
    if m == 0:
        return a
    return total_derivative(prolong(a, m - 1))


def apply(a: Characteristic | DiffPoly, p: DiffPoly) -> DiffPoly:
    a = _char(a)
    result = DiffPoly()
    for m in range(p.order + 1):
        dp = p.partial(m)
        if dp:
            result = result + prolong(a, m) * dp
    return result


def commutator(a: Characteristic | DiffPoly, b: Characteristic | DiffPoly) -> Characteristic:
    """Characteristic of ``[d_a, d_b]``, namely ``d_a b - d_b a``."""
    a, b = _char(a), _char(b)
    return Characteristic(apply(a, b) - apply(b, a))


def apply_to_functional(a: Characteristic | DiffPoly, F: Functional) -> Functional:
    return Functional(_char(a) * euler_derivative(F.representative))


def functional_equal(F: Functional, G: Functional) -> bool:
    diff = (F.representative - G.representative).without_constant()
    return is_exact(diff)
