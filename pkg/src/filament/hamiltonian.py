"""Bi-Hamiltonian structure of the mKdV equation on curvature polynomials.

``pi0(alpha_p) = d_{D_s p}`` and ``pi1(alpha_p) = d_{Dop(p)}`` where
``Dop = D_s^3 + k' D_s^{-1} k D_s + k^2 D_s``.  Every ``D_s^{-1}`` is
resolved by :func:`~filament.diffalg.antiderivative`; a non-local result is
reported as :class:`~filament.diffalg.NotExact`, never papered over.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .derivations import Characteristic, commutator
from .diffalg import (
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

DEFAULT_DEPTH_LIMIT = 5

MKDV = kder(3) + Fraction(3, 2) * K**2 * kder(1)
H0 = Functional(Fraction(1, 2) * K**2)
H1 = Functional(Fraction(1, 2) * kder(1) ** 2 - Fraction(1, 8) * K**4)


@dataclass(frozen=True)
class CovectorField:
    """``alpha_p`` pairing with ``d_a`` as ``int a p ds``."""

    p: DiffPoly

    def pair(self, a: Characteristic | DiffPoly) -> Functional:
        a = a.a if isinstance(a, Characteristic) else a
        return Functional(a * self.p)


def _density(alpha: CovectorField | DiffPoly) -> DiffPoly:
    return alpha.p if isinstance(alpha, CovectorField) else alpha


def pi0(alpha: CovectorField | DiffPoly) -> Characteristic:
    return Characteristic(total_derivative(_density(alpha)))


def apply_D(p: DiffPoly) -> DiffPoly:
    dp = total_derivative(p)
    inner = antiderivative(K * dp, what="D_s^-1(k p')")
    return nth_derivative(dp, 2) + kder(1) * inner + K**2 * dp


def pi1(alpha: CovectorField | DiffPoly) -> Characteristic:
    return Characteristic(apply_D(_density(alpha)))


def recursion(a: Characteristic | DiffPoly) -> Characteristic:
    """``R(d_a) = d_{a'' + k^2 a + k' D_s^{-1}(k a)}``.

    The operator is only defined on exact characteristics, so ``a`` itself
    must also be a total derivative.
    """
    a = a.a if isinstance(a, Characteristic) else a
    antiderivative(a, what="D_s^-1(a)")
    inner = antiderivative(K * a, what="D_s^-1(k a)")
    return Characteristic(nth_derivative(a, 2) + K**2 * a + kder(1) * inner)


class HierarchyError(NotExact):
    """A recursion step left the polynomial algebra."""

    def __init__(self, level: int, cause: NotExact):
        self.level = level
        NotExact.__init__(self, cause.poly, cause.witness, f"level {level}, {cause.what}", cause.reason)


def mkdv_hierarchy(n: int, depth_limit: int = DEFAULT_DEPTH_LIMIT) -> list[Characteristic]:
    """``[a_0, ..., a_n]`` with ``a_0`` the mKdV flow and ``a_{j+1} = R a_j``."""
    if n < 0:
        raise ValueError("hierarchy depth must be non-negative")
    if n > depth_limit:
        raise ValueError(f"depth {n} exceeds the configured limit {depth_limit}")
    flows = [Characteristic(MKDV)]
    for level in range(1, n + 1):
        try:
            flows.append(recursion(flows[-1]))
        except NotExact as err:
            raise HierarchyError(level, err) from err
    return flows


def poisson_pi1(F: Functional, G: Functional) -> Functional:
    """Bracket ``int [ (dF)'' (dG)' + D_s^{-1}(k (dF)') k (dG)' ] ds``."""
    df = euler_derivative(F.representative)
    dg = euler_derivative(G.representative)
    df1 = total_derivative(df)
    dg1 = total_derivative(dg)
    inner = antiderivative(K * df1, what="D_s^-1(k (dF)')")
    return Functional(total_derivative(df1) * dg1 + inner * K * dg1)


@dataclass(frozen=True)
class BiHamiltonianReport:
    c0: Characteristic  # pi0(dH1)
    c1: Characteristic  # pi1(dH0)
    sigma: int | None  # c1 == sigma * c0, None if neither sign works
    c1_is_mkdv: bool

    @property
    def paper_sign_note(self) -> bool:
        """True when ``H1`` as given needs a sign flip to give ``pi0(dH1) = pi1(dH0)``."""
        return self.sigma == -1

    def lines(self) -> list[str]:
        out = [
            f"pi1(dH0) = {self.c1}",
            f"pi0(dH1) = {self.c0}",
            f"pi1(dH0) is the mKdV flow: {str(self.c1_is_mkdv).lower()}",
        ]
        if self.sigma is None:
            out.append("sigma = none (pi1(dH0) is not +-pi0(dH1))")
        elif self.sigma == -1:
            out.append("sigma = -1 (paper sign note)")
        else:
            out.append("sigma = +1")
        return out


def check_bihamiltonian(h0: Functional = H0, h1: Functional = H1) -> BiHamiltonianReport:
    c0 = pi0(euler_derivative(h1.representative))
    c1 = pi1(euler_derivative(h0.representative))
    if c1.a == c0.a:
        sigma = 1
    elif c1.a == -c0.a:
        sigma = -1
    else:
        sigma = None
    return BiHamiltonianReport(c0, c1, sigma, c1.a == MKDV)


def hierarchy_commutators(flows: list[Characteristic]) -> dict[tuple[int, int], Characteristic]:
    """Commutators ``[a_i, a_j]`` for ``i < j``."""
    return {
        (i, j): commutator(flows[i], flows[j])
        for i in range(len(flows))
        for j in range(i + 1, len(flows))
    }
