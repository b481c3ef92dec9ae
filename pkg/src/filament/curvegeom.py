"""Variation fields ``v = f T + g N`` along curves in a space form ``M^2(G)``.

All components are curvature polynomials, so every construction here is
uniform in the curve.  ``G`` stays symbolic unless an operation is specific
to plane curves (``pibar``, ``rbar``, ``pf_hierarchy``, ``hamiltonian_field``).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from . import hamiltonian
from .derivations import Characteristic
from .diffalg import (
    ONE,
    ZERO,
    G,
    K,
    DiffPoly,
    Functional,
    NotExact,
    antiderivative,
    euler_derivative,
    kder,
    nth_derivative,
    total_derivative,
)


@dataclass(frozen=True)
class VariationField:
    f: DiffPoly  # tangential component
    g: DiffPoly  # normal component

    @property
    def is_zero(self) -> bool:
        return self.f.is_zero and self.g.is_zero

    def __add__(self, other: "VariationField") -> "VariationField":
        return VariationField(self.f + other.f, self.g + other.g)

    def __sub__(self, other: "VariationField") -> "VariationField":
        return VariationField(self.f - other.f, self.g - other.g)

    def __neg__(self) -> "VariationField":
        return VariationField(-self.f, -self.g)

    def __mul__(self, c) -> "VariationField":
        return VariationField(self.f * c, self.g * c)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, VariationField):
            return NotImplemented
        return self.f == other.f and self.g == other.g

    def __hash__(self) -> int:
        return hash((self.f, self.g))

    def __str__(self) -> str:
        return f"{self.f} | {self.g}"


@dataclass(frozen=True, eq=False)
class ArcPreservingField(VariationField):
    """A field with ``f' = k g`` and ``f`` free of constant terms."""

    def __post_init__(self):
        if self.f.constant_term():
            raise ValueError(f"tangential part has a constant term: {self.f}")
        if total_derivative(self.f) != K * self.g:
            raise ValueError(f"not arc-length preserving: f' - k g = {rho_of(self)}")

    @classmethod
    def from_normal(cls, g: DiffPoly) -> "ArcPreservingField":
        return lift(g)


T = VariationField(ONE, ZERO)
N = VariationField(ZERO, ONE)


def phi_of(v: VariationField) -> DiffPoly:
    """Normal component of ``nabla_T v``."""
    return total_derivative(v.g) + K * v.f


def rho_of(v: VariationField) -> DiffPoly:
    """Tangential component of ``nabla_T v``."""
    return total_derivative(v.f) - K * v.g


def _at(p: DiffPoly, G_value) -> DiffPoly:
    return p if G_value is None else p.subs_G(G_value)


def v_of_k(v: VariationField, G_value=None) -> DiffPoly:
    """Induced variation of curvature ``phi' - k rho + G g``.

    ``G_value=None`` keeps the sectional curvature symbolic.
    """
    return _at(total_derivative(phi_of(v)) - K * rho_of(v) + G * v.g, G_value)


def lift(g: DiffPoly) -> ArcPreservingField:
    """The arc-preserving field with normal part ``g``."""
    f = antiderivative(K * g, what="D_s^-1(k g)")
    return ArcPreservingField(f, g)


def as_arc_preserving(v: VariationField) -> ArcPreservingField:
    return v if isinstance(v, ArcPreservingField) else ArcPreservingField(v.f, v.g)


@lru_cache(maxsize=4096)
def _on_generator(v: VariationField, m: int) -> DiffPoly:
    # v(k^(m+1)) = D_s v(k^(m)) - rho_v k^(m+1): the speed varies as rho_v times
    # itself, so d/ds picks up -rho_v.  The opposite sign breaks Jacobi.
    if m == 0:
        return v_of_k(v)
    return total_derivative(_on_generator(v, m - 1)) - rho_of(v) * kder(m)


def apply_field(v: VariationField, p: DiffPoly) -> DiffPoly:
    """Action of ``v`` as a derivation of the curvature algebra."""
    result = ZERO
    for m in range(p.order + 1):
        dp = p.partial(m)
        if dp:
            result = result + _on_generator(v, m) * dp
    return result


def covariant_D(v: VariationField, w: VariationField) -> VariationField:
    phi = phi_of(v)
    return VariationField(apply_field(v, w.f) - w.g * phi, apply_field(v, w.g) + w.f * phi)


def bracket(v: VariationField, w: VariationField) -> VariationField:
    """``[v, w] = D_v w - D_w v`` in components."""
    phi_v, phi_w = phi_of(v), phi_of(w)
    f = apply_field(v, w.f) - apply_field(w, v.f) + v.g * phi_w - w.g * phi_v
    g = apply_field(v, w.g) - apply_field(w, v.g) + w.f * phi_v - v.f * phi_w
    return VariationField(f, g)


def inner(v: VariationField, w: VariationField) -> DiffPoly:
    return v.f * w.f + v.g * w.g


def phi_hom(v: VariationField, G_value=None) -> Characteristic:
    """``v -> d_{v(k)}`` on arc-preserving fields."""
    if rho_of(v):
        raise ValueError("phi_hom is defined on arc-preserving fields only")
    return Characteristic(v_of_k(v, G_value))


# -- plane curves --------------------------------------------------------

def _plane(*polys: DiffPoly) -> None:
    for p in polys:
        if p.involves_G:
            raise ValueError(f"plane-curve operation received a G-dependent polynomial: {p}")


def pibar(p: DiffPoly) -> ArcPreservingField:
    """Hamiltonian operator on plane curves: ``D_s^{-1}(k p') T + p' N``."""
    _plane(p)
    return lift(total_derivative(p))


def rbar(v: VariationField) -> ArcPreservingField:
    """Recursion operator on plane-curve fields.

    The new normal part is ``Dop D_s^{-1}(g) = g'' + k^2 g + k' f``, using the
    field's own ``f = D_s^{-1}(k g)``.
    """
    _plane(v.f, v.g)
    v = as_arc_preserving(v)
    g_new = nth_derivative(v.g, 2) + K**2 * v.g + kder(1) * v.f
    return lift(g_new)


PF_FIELD = ArcPreservingField(Fraction(1, 2) * K**2, kder(1))


class LocalityLoss(NotExact):
    def __init__(self, level: int, cause: NotExact):
        self.level = level
        NotExact.__init__(self, cause.poly, cause.witness, f"level {level}, {cause.what}", cause.reason)


def pf_hierarchy(n: int, depth_limit: int = hamiltonian.DEFAULT_DEPTH_LIMIT) -> list[ArcPreservingField]:
    """``[V_0, Rbar V_0, ..., Rbar^n V_0]`` starting from the planar filament field."""
    if n < 0:
        raise ValueError("hierarchy depth must be non-negative")
    if n > depth_limit:
        raise ValueError(f"depth {n} exceeds the configured limit {depth_limit}")
    fields = [PF_FIELD]
    for level in range(1, n + 1):
        try:
            fields.append(rbar(fields[-1]))
        except NotExact as err:
            raise LocalityLoss(level, err) from err
    return fields


def first_variation(L: DiffPoly, v: VariationField, G_value=None) -> Functional:
    """``int (phi_v' + G g_v) dL/dk ds``."""
    rate = _at(total_derivative(phi_of(v)) + G * v.g, G_value)
    return Functional(rate * euler_derivative(L))


def hamiltonian_field(L: DiffPoly) -> ArcPreservingField:
    return pibar(euler_derivative(L))
