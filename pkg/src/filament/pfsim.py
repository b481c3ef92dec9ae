"""Periodic simulation of curvature flows and the plane curves they move.

Curvature is advanced pseudo-spectrally: the constant-coefficient linear
part of the characteristic is handled exactly by an integrating factor and
the remainder by classical RK4 (Lawson's scheme).  When the nonlinear part
is a total derivative it is evaluated in flux form, so the mean curvature
(total turning) is conserved to round-off.

If the flow is given as an arc-preserving field rather than a bare
characteristic, the reconstruction gauge (tangent angle and position at
``s = 0``) is integrated alongside, so curve positions can be compared with
the field itself.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .curvegeom import PF_FIELD, VariationField, phi_of, v_of_k
from .derivations import Characteristic
from .diffalg import (
    DiffPoly,
    NotExact,
    antiderivative,
    evaluate,
    spectral_derivatives,
)


class Blowup(FloatingPointError):
    """Non-finite samples appeared during time stepping."""


class GaugeDrift(RuntimeError):
    """Velocity residual is explained by a rigid motion: a gauge bug, not a field bug."""


@dataclass(frozen=True)
class CurvatureState:
    samples: np.ndarray
    length: float
    time: float = 0.0
    theta0: float = 0.0
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        object.__setattr__(self, "samples", samples)
        n = samples.size
        if n < 16 or n % 2:
            from .diffalg import DegenerateGrid

            raise DegenerateGrid(f"need an even number of samples >= 16, got {n}")
        if not self.length > 0:
            raise ValueError("arc length must be positive")
        if not np.all(np.isfinite(samples)):
            raise Blowup(f"non-finite curvature at t={self.time}")

    @property
    def n(self) -> int:
        return self.samples.size

    @property
    def h(self) -> float:
        return self.length / self.samples.size

    @property
    def s(self) -> np.ndarray:
        return np.arange(self.n) * self.h


@dataclass(frozen=True)
class PlaneCurve:
    points: np.ndarray  # (N, 2)
    theta0: float
    origin: tuple[float, float]
    tangents: np.ndarray  # (N, 2) unit tangents at the nodes
    h: float

    def chord_lengths(self) -> np.ndarray:
        return np.linalg.norm(np.diff(self.points, axis=0), axis=1)

    def check_unit_speed(self, k_max: float, rtol: float = 1e-6) -> bool:
        """Chords of a unit-speed arc of length ``h`` lie in
        ``[h (1 - (k_max h)^2 / 8), h]``; tangents must be unit vectors."""
        chords = self.chord_lengths()
        slack = self.h * ((k_max * self.h) ** 2 / 8 + rtol)
        unit = np.abs(np.linalg.norm(self.tangents, axis=1) - 1.0).max() <= rtol
        return bool(unit and np.all(chords <= self.h * (1 + rtol)) and np.all(chords >= self.h - slack))


def _as_flow(flow) -> tuple[DiffPoly, VariationField | None]:
    if isinstance(flow, VariationField):
        return v_of_k(flow, 0), flow
    if isinstance(flow, Characteristic):
        return flow.a, None
    if isinstance(flow, DiffPoly):
        return flow, None
    raise TypeError(f"cannot build a flow from {type(flow).__name__}")


def flow_rhs(a: Characteristic | DiffPoly, state: CurvatureState) -> np.ndarray:
    """Curvature velocity ``k_t = a`` evaluated on the state's samples."""
    a, _ = _as_flow(a)
    if a.involves_G:
        raise ValueError("the simulator is for plane curves; the characteristic must not involve G")
    return evaluate(a, state.samples, state.h)


def _split_linear(a: DiffPoly) -> tuple[dict[int, float], DiffPoly]:
    """Separate ``sum c_m k^(m)`` from the rest of ``a``."""
    linear: dict[int, float] = {}
    rest = {}
    for (g, exps), c in a.items():
        if g == 0 and sum(exps) == 1:
            linear[len(exps) - 1] = float(c)
        else:
            rest[(g, exps)] = c
    return linear, DiffPoly(rest)


class FlowIntegrator:
    """Integrating-factor RK4 stepper for one flow on one grid."""

    def __init__(self, flow, n: int, length: float, dt: float,
                 integrating_factor: bool = True, cfl: float = 2.8):
        if not dt > 0:
            raise ValueError("time step must be positive")
        self.a, self.field = _as_flow(flow)
        if self.a.involves_G:
            raise ValueError("the simulator is for plane curves; the characteristic must not involve G")
        self.n, self.length, self.dt = n, length, dt
        self.h = length / n
        kappa = 2 * np.pi * np.fft.rfftfreq(n, d=self.h)
        self.kappa = kappa
        self.kappa_odd = kappa.copy()
        self.kappa_odd[-1] = 0.0

        linear, nonlinear = _split_linear(self.a)
        if not integrating_factor:
            nonlinear = self.a
            linear = {}
            order = max(self.a.order, 1)
            limit = cfl * (self.h / np.pi) ** order
            if dt > limit:
                raise ValueError(f"dt={dt} exceeds the explicit stability bound {limit:.3g}")
        symbol = np.zeros_like(kappa, dtype=complex)
        for m, c in linear.items():
            symbol += c * (1j * (self.kappa_odd if m % 2 else kappa)) ** m
        self.symbol = symbol
        self.e_half = np.exp(symbol * dt / 2)
        self.e_full = np.exp(symbol * dt)

        try:
            self.flux = antiderivative(nonlinear) if nonlinear else None
        except NotExact:
            self.flux = None
        self.nonlinear = nonlinear
        self._orders = self._needed_orders(self.flux if self.flux is not None else nonlinear)

        if self.field is not None:
            self._gauge_polys = (phi_of(self.field), self.field.f, self.field.g)
        self.integrating_factor = integrating_factor

    @staticmethod
    def _needed_orders(p: DiffPoly) -> set[int]:
        return {m for (_, exps), _c in p.items() for m, e in enumerate(exps) if e}

    def _eval(self, p: DiffPoly, k: np.ndarray, ders: dict[int, np.ndarray]) -> np.ndarray:
        out = np.zeros(self.n)
        for (_, exps), c in p.items():
            term = np.full(self.n, float(c))
            for m, e in enumerate(exps):
                if e:
                    term = term * ders[m] ** e
            out += term
        return out

    def nonlinear_hat(self, k_hat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Nonlinear tendency in Fourier space, plus the physical samples."""
        k = np.fft.irfft(k_hat, n=self.n)
        if not self.nonlinear:
            return np.zeros_like(k_hat), k
        ders = self._derivs(k_hat, self._orders)
        if self.flux is not None:
            f = self._eval(self.flux, k, ders)
            return 1j * self.kappa_odd * np.fft.rfft(f), k
        return np.fft.rfft(self._eval(self.nonlinear, k, ders)), k

    def _derivs(self, k_hat: np.ndarray, orders) -> dict[int, np.ndarray]:
        out = {}
        for m in orders:
            mult = (1j * (self.kappa_odd if m % 2 else self.kappa)) ** m
            out[m] = np.fft.irfft(k_hat * mult, n=self.n)
        return out

    def gauge_rate(self, k: np.ndarray, theta0: float) -> np.ndarray:
        """``(theta0', x0', y0')`` from the field evaluated at ``s = 0``."""
        if self.field is None:
            return np.zeros(3)
        phi, f, g = (evaluate(p, k, self.h)[0] if p else 0.0 for p in self._gauge_polys)
        c, s = np.cos(theta0), np.sin(theta0)
        return np.array([phi, f * c - g * s, f * s + g * c])

    def step(self, state: CurvatureState) -> CurvatureState:
        dt = self.dt
        u = np.fft.rfft(state.samples)
        y = np.array([state.theta0, *state.origin])
        E, E2 = self.e_half, self.e_full

        # overflow inside a stage is reported once, by the finiteness check below
        with np.errstate(all="ignore"):
            n1, k1 = self.nonlinear_hat(u)
            g1 = self.gauge_rate(k1, y[0])
            n2, k2 = self.nonlinear_hat(E * (u + dt / 2 * n1))
            g2 = self.gauge_rate(k2, y[0] + dt / 2 * g1[0])
            n3, k3 = self.nonlinear_hat(E * u + dt / 2 * n2)
            g3 = self.gauge_rate(k3, y[0] + dt / 2 * g2[0])
            n4, k4 = self.nonlinear_hat(E2 * u + dt * E * n3)
            g4 = self.gauge_rate(k4, y[0] + dt * g3[0])

            u_new = E2 * u + dt / 6 * (E2 * n1 + 2 * E * (n2 + n3) + n4)
            y_new = y + dt / 6 * (g1 + 2 * g2 + 2 * g3 + g4)
            samples = np.fft.irfft(u_new, n=self.n)
        if not (np.all(np.isfinite(samples)) and np.all(np.isfinite(y_new))):
            raise Blowup(f"non-finite values after step to t={state.time + dt}")
        return replace(state, samples=samples, time=state.time + dt,
                       theta0=float(y_new[0]), origin=(float(y_new[1]), float(y_new[2])))


def step(state: CurvatureState, flow, dt: float, integrating_factor: bool = True) -> CurvatureState:
    """Advance one step under a characteristic or an arc-preserving field."""
    return FlowIntegrator(flow, state.n, state.length, dt, integrating_factor).step(state)


def simulate(state: CurvatureState, flow, dt: float, t_end: float,
             record_every: int = 1, integrating_factor: bool = True) -> list[CurvatureState]:
    """Run to ``t_end`` (rounded to a whole number of steps) and return the recorded states."""
    n_steps = int(round((t_end - state.time) / dt))
    if n_steps < 0:
        raise ValueError("t_end precedes the initial time")
    integrator = FlowIntegrator(flow, state.n, state.length, dt, integrating_factor)
    states = [state]
    current = state
    for i in range(1, n_steps + 1):
        current = integrator.step(current)
        if i % record_every == 0 or i == n_steps:
            states.append(current)
    return states


# -- curves ----------------------------------------------------------------

def _turning_angle(state: CurvatureState, shift: float = 0.0) -> np.ndarray:
    """``int_0^{s + shift} k`` at every node, spectrally exact for periodic ``k``."""
    n, h = state.n, state.h
    spec = np.fft.rfft(state.samples)
    mean = spec[0].real / n
    kappa = 2 * np.pi * np.fft.rfftfreq(n, d=h)
    anti = np.zeros_like(spec)
    anti[1:] = spec[1:] / (1j * kappa[1:])
    if n % 2 == 0:
        anti[-1] = 0.0
    phase = np.exp(1j * kappa * shift)
    prim_shift = np.fft.irfft(anti * phase, n=n)
    prim0 = np.fft.irfft(anti, n=n)[0]
    return mean * (state.s + shift) + prim_shift - prim0


def _increments(state: CurvatureState, theta0: float) -> tuple[np.ndarray, np.ndarray]:
    """Unit tangents at the nodes and Simpson increments ``int_{s_j}^{s_j + h} T``."""
    h = state.h
    theta = theta0 + _turning_angle(state)
    theta_mid = theta0 + _turning_angle(state, h / 2)
    theta_next = theta0 + _turning_angle(state, h)
    tang = np.exp(1j * theta)
    return tang, h / 6 * (tang + 4 * np.exp(1j * theta_mid) + np.exp(1j * theta_next))


def reconstruct(state: CurvatureState, theta0: float | None = None,
                origin: Sequence[float] | None = None) -> PlaneCurve:
    """Integrate the Frenet system: tangent angle spectrally, positions by Simpson's rule."""
    theta0 = state.theta0 if theta0 is None else theta0
    origin = state.origin if origin is None else tuple(origin)
    tang, inc = _increments(state, theta0)
    z = origin[0] + 1j * origin[1] + np.concatenate([[0], np.cumsum(inc[:-1])])
    points = np.column_stack([z.real, z.imag])
    tangents = np.column_stack([tang.real, tang.imag])
    return PlaneCurve(points, theta0, tuple(origin), tangents, state.h)


def closure_gap(state: CurvatureState, theta0: float = 0.0) -> float:
    """Distance between ``gamma(L)`` and ``gamma(0)``."""
    _, inc = _increments(state, theta0)
    return float(abs(inc.sum()))


def menger_curvature(points: np.ndarray) -> np.ndarray:
    """Signed curvature of the circle through each interior triple of points."""
    a, b, c = points[:-2], points[1:-1], points[2:]
    ab, bc, ac = b - a, c - b, c - a
    cross = ab[:, 0] * bc[:, 1] - ab[:, 1] * bc[:, 0]
    denom = np.linalg.norm(ab, axis=1) * np.linalg.norm(bc, axis=1) * np.linalg.norm(ac, axis=1)
    return 2 * cross / denom


# -- verification ------------------------------------------------------------

@dataclass(frozen=True)
class VelocityReport:
    rms: float
    max: float
    rms_normal: float
    rms_tangential: float
    rigid_fraction: float  # share of the residual energy explained by a rigid motion
    dt: float


def _rigid_fit_fraction(points: np.ndarray, residual: np.ndarray) -> float:
    # residual ~ a + omega * J (x - c); least squares in (a_x, a_y, omega)
    rel = points - points.mean(axis=0)
    rows = len(points)
    A = np.zeros((2 * rows, 3))
    A[0::2, 0] = 1
    A[1::2, 1] = 1
    A[0::2, 2] = -rel[:, 1]
    A[1::2, 2] = rel[:, 0]
    b = residual.reshape(-1)
    coef, *_ = np.linalg.lstsq(A, b, rcond=None)
    total = float(b @ b)
    if total == 0:
        return 0.0
    left = b - A @ coef
    return 1.0 - float(left @ left) / total


def verify_pf_velocity(states: Sequence[CurvatureState], flow: VariationField = PF_FIELD,
                       gauge_tol: float | None = None) -> VelocityReport:
    """Compare central-difference curve velocity with the symbolic field.

    Each interior state's reconstructed curve velocity is checked against
    ``f T + g N`` evaluated on that state, at matched arc length.  If
    ``gauge_tol`` is given and the RMS residual exceeds it while a rigid
    motion explains most of the residual, :class:`GaugeDrift` is raised.
    """
    if len(states) < 3:
        raise ValueError("need at least three states")
    times = np.array([st.time for st in states])
    steps = np.diff(times)
    dt = float(steps.mean())
    if not np.allclose(steps, dt, rtol=1e-9, atol=1e-12):
        raise ValueError("states must be uniformly spaced in time")
    curves = [reconstruct(st) for st in states]
    residuals, normals, tangentials, rigid = [], [], [], []
    for j in range(1, len(states) - 1):
        st, curve = states[j], curves[j]
        vel = (curves[j + 1].points - curves[j - 1].points) / (2 * dt)
        f = evaluate(flow.f, st.samples, st.h)
        g = evaluate(flow.g, st.samples, st.h)
        T = curve.tangents
        Nrm = np.column_stack([-T[:, 1], T[:, 0]])
        predicted = f[:, None] * T + g[:, None] * Nrm
        res = vel - predicted
        residuals.append(np.linalg.norm(res, axis=1))
        tangentials.append(np.einsum("ij,ij->i", res, T))
        normals.append(np.einsum("ij,ij->i", res, Nrm))
        rigid.append(_rigid_fit_fraction(curve.points, res))
    r = np.concatenate(residuals)
    report = VelocityReport(
        rms=float(np.sqrt(np.mean(r**2))),
        max=float(r.max()),
        rms_normal=float(np.sqrt(np.mean(np.concatenate(normals) ** 2))),
        rms_tangential=float(np.sqrt(np.mean(np.concatenate(tangentials) ** 2))),
        rigid_fraction=float(np.mean(rigid)),
        dt=dt,
    )
    if gauge_tol is not None and report.rms > gauge_tol and report.rigid_fraction > 0.9:
        raise GaugeDrift(f"residual {report.rms:.3e} is {report.rigid_fraction:.0%} rigid motion")
    return report


# -- conservation --------------------------------------------------------------

def quadratures(state: CurvatureState) -> tuple[float, float, float]:
    """``(H0, H1, total turning)`` by the periodic trapezoidal rule."""
    k = state.samples
    k1 = spectral_derivatives(k, state.h, [1])[1]
    h = state.h
    H0 = h * np.sum(0.5 * k**2)
    H1 = h * np.sum(0.5 * k1**2 - 0.125 * k**4)
    TK = h * np.sum(k)
    return float(H0), float(H1), float(TK)


@dataclass
class ConservationReport:
    t: np.ndarray
    H0: np.ndarray
    H1: np.ndarray
    TK: np.ndarray
    drift: dict[str, float] = field(default_factory=dict)
    rel_drift: dict[str, float] = field(default_factory=dict)

    def table(self) -> list[str]:
        rows = ["quantity  abs_drift  rel_drift"]
        for name in ("H0", "H1", "TK"):
            rows.append(f"{name}  {self.drift[name]:.3e}  {self.rel_drift[name]:.3e}")
        return rows


def conserved_report(trajectory: Sequence[CurvatureState]) -> ConservationReport:
    values = np.array([quadratures(st) for st in trajectory])
    report = ConservationReport(
        t=np.array([st.time for st in trajectory]),
        H0=values[:, 0], H1=values[:, 1], TK=values[:, 2],
    )
    for name, col in (("H0", report.H0), ("H1", report.H1), ("TK", report.TK)):
        dev = float(np.max(np.abs(col - col[0])))
        report.drift[name] = dev
        scale = abs(col[0])
        report.rel_drift[name] = dev / scale if scale > 0 else dev
    return report


# -- initial data ------------------------------------------------------------------

def soliton_state(n: int = 512, length: float = 40.0, eta: float = 1.0,
                  center: float | None = None) -> CurvatureState:
    """``2 eta sech(eta (s - s0))`` on a periodic grid."""
    center = length / 2 if center is None else center
    s = np.arange(n) * length / n
    return CurvatureState(2 * eta / np.cosh(eta * (s - center)), length)


def soliton_exact(state: CurvatureState, t: float, eta: float = 1.0, center: float | None = None) -> np.ndarray:
    """Travelling-wave solution ``2 eta sech(eta (s - s0 + eta^2 t))``, wrapped periodically."""
    center = state.length / 2 if center is None else center
    L = state.length
    x = (state.s - center + eta**2 * t + L / 2) % L - L / 2
    return 2 * eta / np.cosh(eta * x)


def circle_state(n: int = 256, length: float = 2 * np.pi) -> CurvatureState:
    return CurvatureState(np.full(n, 2 * np.pi / length), length)


def random_smooth_state(n: int = 256, length: float = 20.0, modes: int = 4,
                        amplitude: float = 0.3, seed: int = 0) -> CurvatureState:
    """Closed-turning curvature ``2 pi / L`` plus a few random low Fourier modes."""
    rng = np.random.default_rng(seed)
    s = np.arange(n) * length / n
    k = np.full(n, 2 * np.pi / length)
    for m in range(1, modes + 1):
        a, b = rng.normal(scale=amplitude / m, size=2)
        k += a * np.cos(2 * np.pi * m * s / length) + b * np.sin(2 * np.pi * m * s / length)
    return CurvatureState(k, length)


# -- output ----------------------------------------------------------------------

CSV_HEADER = ["t", "s", "k", "x", "y", "H0", "H1", "TK"]


def write_csv(path: str | Path, trajectory: Sequence[CurvatureState]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for st in trajectory:
            curve = reconstruct(st)
            H0, H1, TK = quadratures(st)
            for s, k, (x, y) in zip(st.s, st.samples, curve.points):
                writer.writerow([f"{v:.17g}" for v in (st.time, s, k, x, y, H0, H1, TK)])


def write_manifest(path: str | Path, *, n: int, length: float, dt: float, t_end: float,
                   characteristic: str, seed: int, **extra) -> None:
    manifest = {"N": n, "L": length, "dt": dt, "T": t_end,
                "characteristic": characteristic, "seed": seed, **extra}
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def write_svg(path: str | Path, trajectory: Sequence[CurvatureState], snapshots: int = 5,
              size: int = 480) -> None:
    picks = np.unique(np.linspace(0, len(trajectory) - 1, min(snapshots, len(trajectory))).astype(int))
    curves = [reconstruct(trajectory[i]).points for i in picks]
    allpts = np.vstack(curves)
    lo, hi = allpts.min(axis=0), allpts.max(axis=0)
    scale = (size - 40) / max(float((hi - lo).max()), 1e-12)
    paths = []
    for i, pts in enumerate(curves):
        xy = (pts - lo) * scale + 20
        d = " ".join(f"{x:.3f},{size - y:.3f}" for x, y in xy)
        shade = int(200 * (1 - i / max(len(curves) - 1, 1)))
        paths.append(f'<polyline fill="none" stroke="rgb({shade},{shade},255)" '
                     f'stroke-width="1.5" points="{d}"/>')
    svg = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}">\n'
           + "\n".join(paths) + "\n</svg>\n")
    Path(path).write_text(svg)
