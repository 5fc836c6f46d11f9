"""Reduced two-oscillator system.

State ``(phi, gamma, k)``: phase difference, its velocity, and the shared
coupling strength. Parameters are the rescaled ``(m, omega, alpha)`` with the
learning rate scaled out. Integration always carries the unwrapped phase;
:class:`PairState` keeps both the lift and the principal value.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from . import cubic
from .ode import IntegratorConfig, Trajectory, VectorField, integrate

__all__ = [
    "RawPairParams",
    "PairParams",
    "PairState",
    "Equilibrium",
    "UVPoint",
    "StabilityReport",
    "EnergyAudit",
    "BoundednessAudit",
    "DomainError",
    "wrap_phase",
    "rescale",
    "vector_field",
    "pair_field",
    "simulate",
    "equilibria",
    "jacobian",
    "uv",
    "gamma_bound",
    "characteristic_cubic",
    "classify",
    "gamma_boundary",
    "in_gamma_region",
    "in_gamma_region_by_curves",
    "GammaRaster",
    "gamma_raster",
    "energy",
    "energy_gradient",
    "divergence",
    "boundedness_audit",
]

Label = Literal["P1", "P2", "P3", "P4"]
LabelPair = Literal["P1P3", "P2P4"]
StabilityClass = Literal[
    "all-real-negative",
    "complex-pair-sink",
    "saddle-all-real",
    "saddle-complex",
    "saddle-node-degenerate",
]

# |alpha - 2 omega| below this (relative to alpha) is the saddle-node point
DEGENERATE_RTOL = 1e-12


class DomainError(ValueError):
    """Requested quantity does not exist for these parameters."""


def wrap_phase(phi):
    """Principal value in [-pi, pi)."""
    return (np.asarray(phi) + np.pi) % (2 * np.pi) - np.pi


@dataclass(frozen=True)
class RawPairParams:
    m: float
    omega1: float
    omega2: float
    alpha: float
    beta: float = 1.0

    def __post_init__(self):
        if not (self.m > 0 and self.alpha > 0 and self.beta > 0):
            raise ValueError("m, alpha and beta must be positive")


@dataclass(frozen=True)
class PairParams:
    m: float
    omega: float
    alpha: float

    def __post_init__(self):
        if not self.m > 0:
            raise ValueError(f"mass must be positive, got {self.m}")
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not self.omega >= 0:
            raise ValueError(f"omega must be nonnegative, got {self.omega}")

    @property
    def has_equilibria(self) -> bool:
        return self.alpha >= 2 * self.omega

    @property
    def degenerate(self) -> bool:
        return abs(self.alpha - 2 * self.omega) <= DEGENERATE_RTOL * self.alpha


@dataclass(frozen=True)
class PairState:
    phi: float
    gamma: float
    k: float
    phi_lift: float | None = None

    def __post_init__(self):
        if self.phi_lift is None:
            object.__setattr__(self, "phi_lift", self.phi)
            object.__setattr__(self, "phi", float(wrap_phase(self.phi)))
        if not all(math.isfinite(v) for v in (self.phi, self.phi_lift, self.gamma, self.k)):
            raise ValueError("state must be finite")

    @classmethod
    def from_array(cls, x: Sequence[float]) -> "PairState":
        """Build from an integrator row ``(phi_lift, gamma, k)``."""
        return cls(float(wrap_phase(x[0])), float(x[1]), float(x[2]), float(x[0]))

    def as_array(self) -> np.ndarray:
        return np.array([self.phi_lift, self.gamma, self.k])


@dataclass(frozen=True)
class Equilibrium:
    label: Label
    state: PairState
    degenerate: bool = False


@dataclass(frozen=True)
class UVPoint:
    u: float
    v: float


@dataclass(frozen=True)
class StabilityReport:
    label: Label
    eigenvalues: tuple[complex, complex, complex]
    stability: StabilityClass
    in_gamma_region: bool
    oracle_eigenvalues: tuple[complex, complex, complex] = field(repr=False)
    oracle_deviation: float = 0.0


@dataclass(frozen=True)
class EnergyAudit:
    E: float
    dE_dt: float


@dataclass(frozen=True)
class BoundednessAudit:
    epsilon: float
    T_epsilon: float | None
    k_bound: float
    gamma_bound: float
    satisfied: bool


def rescale(raw: RawPairParams) -> PairParams:
    """Scale the learning rate out: ``(beta m, |w1 - w2|/beta, alpha/beta)``."""
    return PairParams(
        m=raw.beta * raw.m,
        omega=abs(raw.omega1 - raw.omega2) / raw.beta,
        alpha=raw.alpha / raw.beta,
    )


def _rhs(phi, gamma, k, p: PairParams):
    return (
        gamma,
        (-gamma + p.omega - k * np.sin(phi)) / p.m,
        p.alpha * np.cos(phi) - k,
    )


def vector_field(s: PairState, p: PairParams) -> np.ndarray:
    return np.array(_rhs(s.phi, s.gamma, s.k, p), dtype=float)


def pair_field(p: PairParams) -> VectorField:
    m, omega, alpha = p.m, p.omega, p.alpha

    def f(t, x):
        sphi, cphi = math.sin(x[0]), math.cos(x[0])
        return np.array([x[1], (-x[1] + omega - x[2] * sphi) / m, alpha * cphi - x[2]])

    return VectorField(3, f)


def simulate(p: PairParams, x0: Sequence[float], cfg: IntegratorConfig) -> Trajectory:
    """Integrate from ``x0 = (phi, gamma, k)``; the phase column is the lift."""
    return integrate(pair_field(p), x0, cfg)


def equilibria(p: PairParams) -> list[Equilibrium]:
    """The four fixed points P1..P4, or an empty list when alpha < 2 omega.

    At alpha = 2 omega the pairs P1=P2 and P3=P4 coincide; all four are still
    returned with ``degenerate=True``.
    """
    if not p.has_equilibria and not p.degenerate:
        return []
    ratio = min(1.0, 2 * p.omega / p.alpha)
    half = 0.5 * math.asin(ratio)
    phis = {
        "P1": half,
        "P2": math.pi / 2 - half,
        "P3": -math.pi + half,
        "P4": -math.pi / 2 - half,
    }
    deg = p.degenerate
    return [
        Equilibrium(label, PairState(phi, 0.0, p.alpha * math.cos(phi), phi), deg)
        for label, phi in phis.items()
    ]


def jacobian(s: PairState, p: PairParams) -> np.ndarray:
    """Analytic Jacobian of the field at any state."""
    return np.array(
        [
            [0.0, 1.0, 0.0],
            [-s.k * math.cos(s.phi) / p.m, -1.0 / p.m, -math.sin(s.phi) / p.m],
            [-p.alpha * math.sin(s.phi), 0.0, -1.0],
        ]
    )


def uv(p: PairParams) -> UVPoint:
    if not p.has_equilibria and not p.degenerate:
        raise DomainError(f"alpha={p.alpha} < 2*omega={2 * p.omega}: no equilibria")
    root = math.sqrt(max(p.alpha**2 - 4 * p.omega**2, 0.0))
    return UVPoint(p.alpha + root, p.alpha - root)


def gamma_bound(m: float) -> float:
    """Largest linear-coefficient variable for which a double root can occur."""
    return 2 * (m * m - m + 1) / (3 * m)


def _pair_of(label: str) -> LabelPair:
    if label in ("P1", "P3", "P1P3"):
        return "P1P3"
    if label in ("P2", "P4", "P2P4"):
        return "P2P4"
    raise ValueError(f"unknown equilibrium label {label!r}")


def _cubic_uv(pair: LabelPair, u, v, m):
    # 2m x^3 + 2(m+1) x^2 + (lin + 2) x + (lin - other)
    lin, other = (u, v) if pair == "P1P3" else (v, u)
    return 2 * m, 2 * (m + 1), lin + 2, lin - other


def characteristic_cubic(label: str, p: PairParams) -> tuple[float, float, float, float]:
    """Coefficients ``(c3, c2, c1, c0)`` of the linearization's characteristic cubic.

    Both equilibrium pairs use a positive leading coefficient ``2m``.
    """
    point = uv(p)
    return _cubic_uv(_pair_of(label), point.u, point.v, p.m)


def _saddle_node_eigenvalues(p: PairParams) -> tuple[complex, complex, complex]:
    root = cmath.sqrt((p.m - 1) ** 2 - 2 * p.m * p.alpha)
    lam = [0j, (-(p.m + 1) - root) / (2 * p.m), (-(p.m + 1) + root) / (2 * p.m)]
    return tuple(sorted(lam, key=lambda z: (z.real, z.imag)))


def _match_deviation(a: Sequence[complex], b: Sequence[complex]) -> float:
    # greedy nearest matching is exact enough for three well-separated roots
    remaining = list(b)
    worst = 0.0
    for z in a:
        j = min(range(len(remaining)), key=lambda i: abs(remaining[i] - z))
        worst = max(worst, abs(remaining.pop(j) - z))
    return worst


def classify(label: str, p: PairParams) -> StabilityReport:
    """Linear stability of one equilibrium.

    Eigenvalues come from the characteristic cubic; ``oracle_eigenvalues`` are
    from a dense eigensolver on the analytic Jacobian for cross-checking.
    """
    pair = _pair_of(label)
    if label not in ("P1", "P2", "P3", "P4"):
        raise ValueError(f"unknown equilibrium label {label!r}")
    eq = {e.label: e for e in equilibria(p)}
    if not eq:
        raise DomainError(f"alpha={p.alpha} < 2*omega={2 * p.omega}: no equilibria")
    coeffs = characteristic_cubic(label, p)
    oracle = tuple(sorted(np.linalg.eigvals(jacobian(eq[label].state, p)), key=lambda z: (z.real, z.imag)))
    oracle = tuple(complex(z) for z in oracle)
    inside = bool(cubic.has_three_real_roots(*coeffs))
    if p.degenerate:
        lam = _saddle_node_eigenvalues(p)
        stability: StabilityClass = "saddle-node-degenerate"
    else:
        lam = tuple(cubic.roots(coeffs))
        n_pos = sum(1 for z in lam if z.imag == 0 and z.real > 0)
        if pair == "P1P3":
            stability = "all-real-negative" if inside else "complex-pair-sink"
        else:
            stability = "saddle-all-real" if inside else "saddle-complex"
        if (n_pos == 1) != (pair == "P2P4"):
            raise ArithmeticError(f"unexpected eigenvalue signs at {label}: {lam}")
    return StabilityReport(label, lam, stability, inside, oracle, _match_deviation(lam, oracle))


def _branches(m, free):
    """The two double-root values of ``lin - other`` for the cubic family."""
    s = 4 * (m + 1) ** 2 - 6 * m * (free + 2)
    rs = np.sqrt(np.maximum(s, 0.0))
    plus = (rs + m + 1) * (rs - 2 * (m + 1)) ** 2 / (54 * m * m)
    minus = (-rs + m + 1) * (rs + 2 * (m + 1)) ** 2 / (54 * m * m)
    return s, plus, minus


def gamma_boundary(m: float, free_var: float) -> tuple[float, float]:
    """Boundary values of the dependent variable at ``free_var``.

    For the P1/P3 region this maps ``u`` to the two boundary ``v`` values
    ``u - branch``; the P2/P4 region uses the same relation with ``u`` and
    ``v`` exchanged. Returned as (upper-sign branch, lower-sign branch).
    """
    s, plus, minus = _branches(m, free_var)
    if s < 0:
        raise DomainError(f"no double root for free_var={free_var} > {gamma_bound(m)}")
    return float(free_var - plus), float(free_var - minus)


def in_gamma_region(pair: LabelPair, point: UVPoint, m: float) -> bool:
    """Three real roots (discriminant >= 0, boundary counted inside)."""
    return bool(cubic.has_three_real_roots(*_cubic_uv(_pair_of(pair), point.u, point.v, m)))


def in_gamma_region_by_curves(pair: LabelPair, u, v, m: float):
    """Membership from the closed-form boundary curves (vectorized).

    Inside means the free variable admits a double root (``s >= 0``) and the
    difference ``free - dependent`` lies between the two branch values.
    """
    free, dep = (u, v) if _pair_of(pair) == "P1P3" else (v, u)
    s, plus, minus = _branches(m, np.asarray(free, dtype=float))
    diff = np.asarray(free, dtype=float) - np.asarray(dep, dtype=float)
    lo, hi = np.minimum(plus, minus), np.maximum(plus, minus)
    return (s >= 0) & (diff >= lo) & (diff <= hi)


@dataclass(frozen=True)
class GammaRaster:
    """Region membership on a square ``(u, v)`` grid; arrays are indexed ``[i_v, i_u]``."""

    m: float
    u: np.ndarray  # 1-D axis
    v: np.ndarray  # 1-D axis
    in_gamma1: np.ndarray
    in_gamma2: np.ndarray
    discriminant_p1p3: np.ndarray
    discriminant_p2p4: np.ndarray

    def rows(self) -> np.ndarray:
        """Flat table ``u, v, m, in_gamma1, in_gamma2, disc_p1p3, disc_p2p4``, u varying fastest."""
        U, V = np.meshgrid(self.u, self.v)
        return np.column_stack([
            U.ravel(), V.ravel(), np.full(U.size, float(self.m)),
            self.in_gamma1.ravel().astype(float), self.in_gamma2.ravel().astype(float),
            self.discriminant_p1p3.ravel(), self.discriminant_p2p4.ravel(),
        ])


def gamma_raster(m: float, n: int = 1000, extent: float | None = None) -> GammaRaster:
    """Discriminant-based membership on ``[0, extent]^2`` (default: the double-root bound)."""
    if not m > 0:
        raise ValueError("m must be positive")
    if n < 2:
        raise ValueError("grid must have at least 2 points per side")
    L = gamma_bound(m) if extent is None else float(extent)
    axis = np.linspace(0.0, L, n)
    U, V = np.meshgrid(axis, axis)
    c13 = _cubic_uv("P1P3", U, V, m)
    c24 = _cubic_uv("P2P4", U, V, m)
    return GammaRaster(
        m=float(m), u=axis, v=axis.copy(),
        in_gamma1=cubic.has_three_real_roots(*c13),
        in_gamma2=cubic.has_three_real_roots(*c24),
        discriminant_p1p3=cubic.discriminant(*c13),
        discriminant_p2p4=cubic.discriminant(*c24),
    )


def energy(s: PairState, p: PairParams) -> EnergyAudit:
    """Energy at the principal phase and its analytic time derivative."""
    phi = s.phi
    E = p.alpha * p.m * s.gamma**2 / 2 - p.alpha * p.omega * phi - p.alpha * s.k * math.cos(phi) + s.k**2 / 2
    dE = -(p.alpha * s.gamma**2 + (s.k - p.alpha * math.cos(phi)) ** 2)
    return EnergyAudit(E, dE)


def energy_gradient(s: PairState, p: PairParams) -> np.ndarray:
    return np.array(
        [
            -p.alpha * p.omega + p.alpha * s.k * math.sin(s.phi),
            p.alpha * p.m * s.gamma,
            s.k - p.alpha * math.cos(s.phi),
        ]
    )


def divergence(p: PairParams) -> float:
    return -1.0 / p.m - 1.0


def boundedness_audit(traj: Trajectory, p: PairParams, epsilon: float) -> BoundednessAudit:
    """Earliest sample after which |k| and |gamma| stay inside the absorbing box."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    k_bound = p.alpha + epsilon
    g_bound = p.omega + p.alpha + epsilon
    ok = (np.abs(traj.states[:, 2]) <= k_bound) & (np.abs(traj.states[:, 1]) <= g_bound)
    bad = np.flatnonzero(~ok)
    if bad.size == 0:
        T = float(traj.times[0])
    elif bad[-1] == len(ok) - 1:
        T = None
    else:
        T = float(traj.times[bad[-1] + 1])
    return BoundednessAudit(epsilon, T, k_bound, g_bound, T is not None)
