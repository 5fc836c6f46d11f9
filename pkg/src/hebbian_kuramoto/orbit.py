"""Constant-rotation approximation of the rotating orbit (unit mass).

The phase is taken to advance at a constant rate ``zeta``; the coupling and
the phase velocity are then first-harmonic and second-harmonic functions of
the phase::

    k(phi)     = a cos(phi) + b sin(phi)
    gamma(phi) = zeta + c cos(2 phi) + d sin(2 phi)

``zeta`` is the real root of ``2x^3 - 2 omega x^2 + (alpha + 2) x - 2 omega``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import cubic
from .ode import IntegratorConfig
from .pair import DomainError, PairParams, PairState, simulate, wrap_phase

__all__ = [
    "PeriodicApproximation",
    "ApproximationError",
    "UniquenessError",
    "zeta_cubic",
    "solve_zeta",
    "approximate",
    "approx_state",
    "orbit_distance",
    "approximation_error",
    "overlay_rows",
]


class UniquenessError(ArithmeticError):
    """The rotation-rate cubic has more than one real root."""


@dataclass(frozen=True)
class PeriodicApproximation:
    zeta: float
    a: float
    b: float
    c: float
    d: float
    phi0: float = 0.0

    def gamma_at(self, phi):
        return self.zeta + self.c * np.cos(2 * phi) + self.d * np.sin(2 * phi)

    def k_at(self, phi):
        return self.a * np.cos(phi) + self.b * np.sin(phi)


@dataclass(frozen=True)
class ApproximationError:
    rms_gamma_k: float
    sup_gamma_k: float
    k_amplitude: float  # half peak-to-peak of the simulated k
    n_samples: int


def _require_unit_mass(p: PairParams) -> None:
    if p.m != 1:
        raise ValueError(f"the rotation approximation is derived for m = 1, got m = {p.m}")


def zeta_cubic(p: PairParams) -> tuple[float, float, float, float]:
    return (2.0, -2.0 * p.omega, p.alpha + 2.0, -2.0 * p.omega)


def solve_zeta(p: PairParams) -> float:
    _require_unit_mass(p)
    coeffs = zeta_cubic(p)
    if cubic.discriminant(*coeffs) > 0:
        raise UniquenessError(f"rotation cubic has three real roots at omega={p.omega}, alpha={p.alpha}")
    real = [z.real for z in cubic.roots(coeffs) if z.imag == 0]
    if len(real) != 1:
        raise UniquenessError(f"expected one real root, got {real}")
    return real[0]


def approximate(p: PairParams, phi0: float = 0.0) -> PeriodicApproximation:
    z = solve_zeta(p)
    al = p.alpha
    z2 = z * z + 1
    q = 4 * z * z + 1
    return PeriodicApproximation(
        zeta=z,
        a=al / z2,
        b=al * z / z2,
        c=3 * z * al / (2 * z2 * q),
        d=(2 * z * z - 1) * al / (2 * z2 * q),
        phi0=phi0,
    )


def approx_state(appx: PeriodicApproximation, t: float) -> PairState:
    lift = appx.zeta * t + appx.phi0
    phi = float(wrap_phase(lift))
    return PairState(phi, float(appx.gamma_at(lift)), float(appx.k_at(lift)), lift)


def orbit_distance(appx: PeriodicApproximation, phi, gamma, k, n_bins: int = 64) -> tuple[float, float]:
    """Phase-binned RMS and sup distance in the (gamma, k) plane.

    Each sample is compared with the approximation at its own phase; the RMS
    averages bins with equal weight so dwell time does not bias it.
    """
    phi = wrap_phase(np.asarray(phi, dtype=float))
    dist2 = (np.asarray(gamma) - appx.gamma_at(phi)) ** 2 + (np.asarray(k) - appx.k_at(phi)) ** 2
    bins = np.minimum(((phi + np.pi) / (2 * np.pi) * n_bins).astype(int), n_bins - 1)
    sums = np.bincount(bins, weights=dist2, minlength=n_bins)
    counts = np.bincount(bins, minlength=n_bins)
    filled = counts > 0
    rms = math.sqrt(float(np.mean(sums[filled] / counts[filled])))
    return rms, math.sqrt(float(dist2.max()))


def _simulate_attractor(p, horizon, transient, x0, sample_interval):
    cfg = IntegratorConfig(horizon=horizon, sample_interval=sample_interval)
    traj = simulate(p, x0, cfg)
    keep = traj.times >= transient
    return traj.times[keep], traj.states[keep]


def approximation_error(
    p: PairParams,
    horizon: float = 300.0,
    transient: float = 100.0,
    x0=(0.0, 0.0, 0.0),
    sample_interval: float = 0.01,
    n_bins: int = 64,
) -> ApproximationError:
    """Compare the approximation with a simulated post-transient trajectory."""
    _require_unit_mass(p)
    if p.alpha >= 2 * p.omega:
        raise DomainError(f"alpha={p.alpha} >= 2*omega={2 * p.omega}: equilibria exist, no rotating orbit")
    if not 0 <= transient < horizon:
        raise ValueError("transient must lie in [0, horizon)")
    appx = approximate(p)
    _, s = _simulate_attractor(p, horizon, transient, x0, sample_interval)
    if s[-1, 0] - s[0, 0] < 2 * np.pi:
        raise DomainError("trajectory stopped rotating; it converged instead of reaching the orbit")
    rms, sup = orbit_distance(appx, s[:, 0], s[:, 1], s[:, 2], n_bins)
    amp = 0.5 * float(s[:, 2].max() - s[:, 2].min())
    return ApproximationError(rms, sup, amp, len(s))


def overlay_rows(
    p: PairParams,
    horizon: float = 300.0,
    transient: float = 100.0,
    x0=(0.0, 0.0, 0.0),
    sample_interval: float = 0.01,
):
    """Rows ``(phi, gamma_sim, k_sim, gamma_approx, k_approx)`` for plotting."""
    appx = approximate(p)
    _, s = _simulate_attractor(p, horizon, transient, x0, sample_interval)
    phi = wrap_phase(s[:, 0])
    return np.column_stack([phi, s[:, 1], s[:, 2], appx.gamma_at(phi), appx.k_at(phi)])
