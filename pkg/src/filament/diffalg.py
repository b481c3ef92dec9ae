"""Exact differential algebra of curvature polynomials.

Elements are polynomials in ``k, k', k'', ...`` with rational coefficients
in ``Q[G]``, where ``G`` is the (constant) sectional curvature of the
ambient space form.  ``D_s`` sends ``k^(m)`` to ``k^(m+1)`` and kills ``G``.

Internally a monomial is keyed by ``(g_power, exps)`` where ``exps[m]`` is
the exponent of ``k^(m)``; trailing zeros are stripped so keys are unique.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Iterator, Mapping

import numpy as np

Key = tuple[int, tuple[int, ...]]


class NotExact(ArithmeticError):
    """Raised when a polynomial has no antiderivative in the algebra.

    ``witness`` is the nonzero Euler derivative of the offending input (or
    its constant term when that is the obstruction).
    """

    def __init__(self, poly: "DiffPoly", witness: "DiffPoly", what: str = "",
                 reason: str = "nonzero Euler derivative"):
        self.poly = poly
        self.witness = witness
        self.what = what
        self.reason = reason
        label = f"{what}: " if what else ""
        super().__init__(f"{label}{poly} is not a total derivative ({reason}: {witness})")


class DegenerateGrid(ValueError):
    """Too few samples or a non-positive grid spacing."""


def _strip(exps: Iterable[int]) -> tuple[int, ...]:
    exps = list(exps)
    while exps and exps[-1] == 0:
        exps.pop()
    return tuple(exps)


def _mul_exps(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return a
    out = list(a)
    for i, e in enumerate(b):
        out[i] += e
    return tuple(out)


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, Rational)):
        return Fraction(c)
    raise TypeError(f"exact coefficient required, got {type(c).__name__}")


@dataclass(frozen=True)
class DiffMonomial:
    coeff: Fraction
    g_power: int
    factors: tuple[tuple[int, int], ...]  # (order, exponent) pairs, ascending order

    @property
    def degree(self) -> int:
        return sum(e for _, e in self.factors)

    def key(self) -> Key:
        exps = [0] * (self.factors[-1][0] + 1 if self.factors else 0)
        for m, e in self.factors:
            exps[m] = e
        return self.g_power, tuple(exps)


def _sort_key(key: Key):
    g, exps = key
    # degree-major; then G power; then monomials carrying higher orders first
    return sum(exps), g, tuple(-e for e in reversed(exps)), -len(exps)


class DiffPoly:
    """Immutable element of the differential algebra."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Key, Fraction] | None = None):
        clean: dict[Key, Fraction] = {}
        if terms:
            for (g, exps), c in terms.items():
                key = (g, _strip(exps))
                clean[key] = clean.get(key, 0) + _as_fraction(c)
            clean = {k: c for k, c in clean.items() if c}
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict[Key, Fraction]) -> "DiffPoly":
        # trusted constructor: keys stripped, coefficients nonzero Fractions
        obj = cls.__new__(cls)
        obj._terms = terms
        obj._hash = None
        return obj

    @classmethod
    def const(cls, c) -> "DiffPoly":
        c = _as_fraction(c)
        return cls._raw({(0, ()): c} if c else {})

    @classmethod
    def kder(cls, m: int = 0) -> "DiffPoly":
        """The generator ``k^(m)``."""
        if m < 0:
            raise ValueError("derivative order must be non-negative")
        return cls._raw({(0, (0,) * m + (1,)): Fraction(1)})

    @classmethod
    def gconst(cls) -> "DiffPoly":
        return cls._raw({(1, ()): Fraction(1)})

    @classmethod
    def from_monomials(cls, monos: Iterable[DiffMonomial]) -> "DiffPoly":
        acc: dict[Key, Fraction] = {}
        for mono in monos:
            key = mono.key()
            acc[key] = acc.get(key, 0) + mono.coeff
        return cls(acc)

    # -- inspection ------------------------------------------------------
    def items(self) -> Iterator[tuple[Key, Fraction]]:
        return iter(self._terms.items())

    @property
    def terms(self) -> list[DiffMonomial]:
        out = []
        for key in sorted(self._terms, key=_sort_key):
            g, exps = key
            factors = tuple((m, e) for m, e in enumerate(exps) if e)
            out.append(DiffMonomial(self._terms[key], g, factors))
        return out

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def order(self) -> int:
        """Highest derivative order present; -1 for k-free polynomials."""
        return max((len(exps) - 1 for _, exps in self._terms), default=-1)

    @property
    def involves_G(self) -> bool:
        return any(g for g, _ in self._terms)

    def constant_term(self) -> "DiffPoly":
        """The k-free part (which may still carry powers of G)."""
        return DiffPoly._raw({k: c for k, c in self._terms.items() if not k[1]})

    def without_constant(self) -> "DiffPoly":
        return DiffPoly._raw({k: c for k, c in self._terms.items() if k[1]})

    def degree_in(self, m: int) -> int:
        return max((exps[m] if m < len(exps) else 0 for _, exps in self._terms), default=0)

    def subs_G(self, value) -> "DiffPoly":
        value = _as_fraction(value)
        acc: dict[Key, Fraction] = {}
        for (g, exps), c in self._terms.items():
            key = (0, exps)
            acc[key] = acc.get(key, 0) + c * value**g
        return DiffPoly(acc)

    def partial(self, m: int) -> "DiffPoly":
        """Partial derivative with respect to ``k^(m)``."""
        acc: dict[Key, Fraction] = {}
        for (g, exps), c in self._terms.items():
            if m < len(exps) and exps[m]:
                new = list(exps)
                new[m] -= 1
                key = (g, _strip(new))
                acc[key] = acc.get(key, 0) + c * exps[m]
        return DiffPoly._raw(acc)

    # -- ring structure --------------------------------------------------
    @staticmethod
    def _coerce(other) -> "DiffPoly":
        if isinstance(other, DiffPoly):
            return other
        return DiffPoly.const(other)

    def __add__(self, other) -> "DiffPoly":
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        acc = dict(self._terms)
        for key, c in other._terms.items():
            v = acc.get(key, 0) + c
            if v:
                acc[key] = v
            else:
                acc.pop(key, None)
        return DiffPoly._raw(acc)

    __radd__ = __add__

    def __neg__(self) -> "DiffPoly":
        return DiffPoly._raw({k: -c for k, c in self._terms.items()})

    def __sub__(self, other) -> "DiffPoly":
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "DiffPoly":
        return (-self) + other

    def scale(self, c) -> "DiffPoly":
        c = _as_fraction(c)
        if not c:
            return ZERO
        return DiffPoly._raw({k: v * c for k, v in self._terms.items()})

    def __mul__(self, other) -> "DiffPoly":
        if not isinstance(other, DiffPoly):
            try:
                return self.scale(other)
            except TypeError:
                return NotImplemented
        acc: dict[Key, Fraction] = {}
        for (g1, e1), c1 in self._terms.items():
            for (g2, e2), c2 in other._terms.items():
                key = (g1 + g2, _mul_exps(e1, e2))
                acc[key] = acc.get(key, 0) + c1 * c2
        return DiffPoly._raw({k: c for k, c in acc.items() if c})

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "DiffPoly":
        if not isinstance(n, int) or isinstance(n, bool):
            return NotImplemented
        if n < 0:
            raise ValueError("negative powers are not polynomials")
        result, base = ONE, self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, DiffPoly):
            return self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self._terms == DiffPoly.const(other)._terms
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __str__(self) -> str:
        from .exprio import format_poly

        return format_poly(self)

    def __repr__(self) -> str:
        return f"DiffPoly('{self}')"


ZERO = DiffPoly()
ONE = DiffPoly.const(1)
K = DiffPoly.kder(0)
G = DiffPoly.gconst()


def kder(m: int) -> DiffPoly:
    return DiffPoly.kder(m)


# -- calculus ------------------------------------------------------------

def total_derivative(p: DiffPoly) -> DiffPoly:
    acc: dict[Key, Fraction] = {}
    for (g, exps), c in p.items():
        for m, e in enumerate(exps):
            if not e:
                continue
            new = list(exps)
            new[m] -= 1
            if m + 1 < len(new):
                new[m + 1] += 1
            else:
                new.append(1)
            key = (g, _strip(new))
            acc[key] = acc.get(key, 0) + c * e
    return DiffPoly._raw({k: c for k, c in acc.items() if c})


def nth_derivative(p: DiffPoly, n: int) -> DiffPoly:
    for _ in range(n):
        p = total_derivative(p)
    return p


def euler_derivative(p: DiffPoly) -> DiffPoly:
    """Variational derivative ``sum_m (-D_s)^m dp/dk^(m)``."""
    result = ZERO
    for m in range(p.order, -1, -1):
        # Horner form: (-D)( ... ) + dp/dk^(m)
        result = p.partial(m) - total_derivative(result)
    return result


def is_exact(p: DiffPoly) -> bool:
    """Membership in the image of ``D_s``."""
    return p.constant_term().is_zero and euler_derivative(p).is_zero


def antiderivative(p: DiffPoly, what: str = "") -> DiffPoly:
    """Return ``q`` with ``D_s q = p`` and no constant term.

    Peels off the top-order linear part at each stage; the order of the
    remainder drops strictly, so the loop ends after ``p.order`` rounds.
    """
    original = p
    result: dict[Key, Fraction] = {}
    while p:
        n = p.order
        if n < 0:
            raise NotExact(original, original.constant_term(), what, "nonzero constant term")
        if n == 0:
            raise NotExact(original, euler_derivative(original), what)
        q0: dict[Key, Fraction] = {}
        for (g, exps), c in p.items():
            if len(exps) - 1 != n:
                continue
            if exps[n] != 1:
                raise NotExact(original, euler_derivative(original), what)
            j = exps[n - 1]
            new = list(exps[:n])
            new[n - 1] = j + 1
            key = (g, tuple(new))
            q0[key] = q0.get(key, 0) + c / (j + 1)
        step = DiffPoly._raw({k: c for k, c in q0.items() if c})
        for key, c in step.items():
            result[key] = result.get(key, 0) + c
        p = p - total_derivative(step)
    return DiffPoly(result)


def normal_form(p: DiffPoly) -> DiffPoly:
    """Canonical representative of ``p`` modulo total derivatives and constants.

    Monomials linear in their top derivative are integrated by parts until
    every surviving monomial is nonlinear in its top derivative or depends
    on ``k`` alone.  Two polynomials define the same functional iff their
    normal forms coincide.
    """
    done: dict[Key, Fraction] = {}
    pending = dict(p.without_constant().items())
    while pending:
        top = max(len(exps) - 1 for _, exps in pending)
        level = {k: c for k, c in pending.items() if len(k[1]) - 1 == top}
        for key in level:
            del pending[key]
        for (g, exps), c in level.items():
            n = top
            if n == 0 or exps[n] >= 2:
                done[(g, exps)] = done.get((g, exps), 0) + c
                continue
            # c * B * (k^(n-1))^j * k^(n)  ~  -c/(j+1) * D(B) * (k^(n-1))^(j+1)
            j = exps[n - 1]
            rest = list(exps[:n])
            rest[n - 1] = 0
            b = DiffPoly._raw({(g, _strip(rest)): Fraction(1)})
            lift = [0] * n
            lift[n - 1] = j + 1
            reduced = total_derivative(b) * DiffPoly._raw({(0, tuple(lift)): -c / (j + 1)})
            for key, v in reduced.items():
                pending[key] = pending.get(key, 0) + v
        pending = {k: c for k, c in pending.items() if c}
    return DiffPoly(done)


class Functional:
    """``int f ds`` modulo total derivatives and constants."""

    __slots__ = ("representative", "normal_form")

    def __init__(self, representative: DiffPoly):
        self.representative = representative
        self.normal_form = normal_form(representative)

    @property
    def is_zero(self) -> bool:
        return self.normal_form.is_zero

    def __add__(self, other: "Functional") -> "Functional":
        return Functional(self.representative + other.representative)

    def __neg__(self) -> "Functional":
        return Functional(-self.representative)

    def __sub__(self, other: "Functional") -> "Functional":
        return Functional(self.representative - other.representative)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Functional):
            return NotImplemented
        return self.normal_form == other.normal_form

    def __hash__(self) -> int:
        return hash(self.normal_form)

    def __repr__(self) -> str:
        from .exprio import format_functional

        return f"Functional('{format_functional(self)}')"


# -- numerics bridge -----------------------------------------------------

def spectral_derivatives(samples: np.ndarray, h: float, orders: Iterable[int]) -> dict[int, np.ndarray]:
    """Spectral derivatives of periodic samples for each requested order."""
    samples = np.asarray(samples, dtype=float)
    n = samples.size
    if n < 4:
        raise DegenerateGrid(f"need at least 4 samples, got {n}")
    if not h > 0:
        raise DegenerateGrid(f"grid spacing must be positive, got {h}")
    orders = sorted(set(orders))
    out: dict[int, np.ndarray] = {}
    if not orders:
        return out
    spec = np.fft.rfft(samples)
    kappa = 2 * np.pi * np.fft.rfftfreq(n, d=h)
    kappa_odd = kappa.copy()
    if n % 2 == 0:
        kappa_odd[-1] = 0.0
    for m in orders:
        if m == 0:
            out[0] = samples.copy()
            continue
        mult = (1j * (kappa_odd if m % 2 else kappa)) ** m
        out[m] = np.fft.irfft(spec * mult, n=n)
    return out


def evaluate(p: DiffPoly, k_samples, h: float, G_value: float = 0.0) -> np.ndarray:
    """Pointwise value of ``p`` on periodic curvature samples."""
    k_samples = np.asarray(k_samples, dtype=float)
    orders = {m for (_, exps), _c in p.items() for m, e in enumerate(exps) if e}
    ders = spectral_derivatives(k_samples, h, orders)
    out = np.zeros(k_samples.size)
    for (g, exps), c in p.items():
        term = np.full(k_samples.size, float(c) * G_value**g)
        for m, e in enumerate(exps):
            if e:
                term = term * ders[m] ** e
        out += term
    return out
