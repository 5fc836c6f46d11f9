"""N oscillators with inertia and Hebbian coupling on a complete graph.

Flattened state layout (length ``2N + N(N-1)/2``)::

    [0, N)           phases phi_i (lifted, not wrapped)
    [N, 2N)          velocities v_i = dphi_i/dt
    [2N, end)        couplings K_ij for i < j, in ``numpy.triu_indices(N, 1)`` order

Only the upper triangle is integrated, so the coupling matrix is symmetric by
construction.

Intrinsic frequencies are drawn once per run as ``sigma * z`` with ``z`` from
``numpy.random.Generator(PCG64(seed)).standard_normal(N)`` (ziggurat method).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .ode import IntegratorConfig, Trajectory, VectorField, integrate

__all__ = [
    "EnsembleParams",
    "EnsembleState",
    "OrderParameterSeries",
    "ClusterReport",
    "EnsembleRun",
    "draw_frequencies",
    "init",
    "flatten",
    "unflatten",
    "ensemble_field",
    "vector_field",
    "order_param",
    "order_param_r2",
    "simulate",
    "detect_clusters",
    "mean_velocities",
]


@dataclass(frozen=True)
class EnsembleParams:
    N: int
    mass: float
    alpha: float
    sigma2: float
    seed: int = 0
    beta: float = 1.0

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("N must be >= 2")
        if not self.mass > 0:
            raise ValueError("mass must be positive")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if not self.sigma2 >= 0:
            raise ValueError("sigma2 must be nonnegative")

    @property
    def dimension(self) -> int:
        return 2 * self.N + self.N * (self.N - 1) // 2


@dataclass
class EnsembleState:
    phases: np.ndarray  # lifted
    velocities: np.ndarray
    couplings: np.ndarray  # upper triangle, triu_indices order
    frequencies: np.ndarray = field(repr=False)

    @property
    def N(self) -> int:
        return len(self.phases)

    @property
    def coupling(self) -> np.ndarray:
        """Full symmetric matrix; the diagonal is zero and unused."""
        K = np.zeros((self.N, self.N))
        iu = np.triu_indices(self.N, 1)
        K[iu] = self.couplings
        K[(iu[1], iu[0])] = self.couplings
        return K

    @property
    def principal_phases(self) -> np.ndarray:
        return np.mod(self.phases, 2 * np.pi)


@dataclass
class OrderParameterSeries:
    times: np.ndarray
    r2: np.ndarray
    r1: np.ndarray | None = None


@dataclass
class ClusterReport:
    clusters: list[list[int]]
    mean_velocity: list[float]

    def __len__(self) -> int:
        return len(self.clusters)


@dataclass
class EnsembleRun:
    params: EnsembleParams
    config: IntegratorConfig
    series: OrderParameterSeries
    final: EnsembleState
    trajectory: Trajectory = field(repr=False)
    clusters: ClusterReport | None = None

    def coupling_max_after(self, t_burn: float) -> float:
        N = self.params.N
        keep = self.trajectory.times >= t_burn
        return float(np.abs(self.trajectory.states[keep, 2 * N:]).max())


def draw_frequencies(p: EnsembleParams) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(p.seed))
    return math.sqrt(p.sigma2) * rng.standard_normal(p.N)


def init(p: EnsembleParams, frequencies: Sequence[float] | None = None) -> EnsembleState:
    """Evenly spaced phases, zero velocities, unit couplings."""
    N = p.N
    omega = draw_frequencies(p) if frequencies is None else np.asarray(frequencies, dtype=float)
    if omega.shape != (N,):
        raise ValueError(f"expected {N} frequencies, got shape {omega.shape}")
    return EnsembleState(
        phases=2 * np.pi * np.arange(N) / N,
        velocities=np.zeros(N),
        couplings=np.ones(N * (N - 1) // 2),
        frequencies=omega,
    )


def flatten(s: EnsembleState) -> np.ndarray:
    return np.concatenate([s.phases, s.velocities, s.couplings])


def unflatten(x: np.ndarray, frequencies: np.ndarray) -> EnsembleState:
    N = len(frequencies)
    return EnsembleState(x[:N].copy(), x[N:2 * N].copy(), x[2 * N:].copy(), frequencies)


def ensemble_field(p: EnsembleParams, frequencies: np.ndarray) -> VectorField:
    N, m, alpha, beta = p.N, p.mass, p.alpha, p.beta
    omega = np.asarray(frequencies, dtype=float)
    iu, ju = np.triu_indices(N, 1)
    K = np.zeros((N, N))

    def f(t, x):
        phi = x[:N]
        v = x[N:2 * N]
        kv = x[2 * N:]
        s, c = np.sin(phi), np.cos(phi)
        # sin(phi_j - phi_i) and cos(phi_j - phi_i) for all pairs
        S = np.outer(c, s) - np.outer(s, c)
        K[iu, ju] = kv
        K[ju, iu] = kv
        drive = (K * S).sum(axis=1) / N
        out = np.empty_like(x)
        out[:N] = v
        out[N:2 * N] = (-v + omega + drive) / m
        cos_ij = c[iu] * c[ju] + s[iu] * s[ju]
        out[2 * N:] = beta * (alpha * cos_ij - kv)
        return out

    return VectorField(p.dimension, f)


def vector_field(state: EnsembleState, p: EnsembleParams) -> np.ndarray:
    return ensemble_field(p, state.frequencies)(0.0, flatten(state))


def order_param(phases, q: int = 2) -> float:
    """``|mean(exp(i q phi))|``; q = 2 merges anti-phase clusters."""
    phases = np.asarray(phases, dtype=float)
    if phases.size == 0:
        raise ValueError("order parameter of an empty phase set")
    z = np.exp(1j * q * phases).mean()
    return float(min(1.0, abs(z)))


def order_param_r2(phases) -> float:
    return order_param(phases, 2)


def _order_series(phases: np.ndarray, q: int) -> np.ndarray:
    return np.minimum(1.0, np.abs(np.exp(1j * q * phases).mean(axis=1)))


def default_config(p: EnsembleParams, horizon: float, sample_interval: float) -> IntegratorConfig:
    """Fixed-step RK4 (h = 0.01) for light masses, adaptive above m = 10."""
    if p.mass > 10:
        return IntegratorConfig(method="adaptive", horizon=horizon, step=0.01, abs_tol=1e-8, rel_tol=1e-8,
                                sample_interval=sample_interval)
    return IntegratorConfig(method="rk4", horizon=horizon, step=0.01, sample_interval=sample_interval)


def simulate(
    p: EnsembleParams,
    horizon: float = 100.0,
    sample_interval: float = 0.1,
    cfg: IntegratorConfig | None = None,
    frequencies: Sequence[float] | None = None,
    initial: EnsembleState | None = None,
    with_r1: bool = False,
    cluster_window: float | None = None,
    velocity_tol: float = 0.05,
) -> EnsembleRun:
    """Integrate from the standard start and sample the order parameter.

    When ``cluster_window`` is given, clusters are detected from velocities
    averaged over the final window of that length.
    """
    state0 = initial if initial is not None else init(p, frequencies)
    if cfg is None:
        cfg = default_config(p, horizon, sample_interval)
    traj = integrate(ensemble_field(p, state0.frequencies), flatten(state0), cfg)
    N = p.N
    phases = traj.states[:, :N]
    series = OrderParameterSeries(traj.times, _order_series(phases, 2), _order_series(phases, 1) if with_r1 else None)
    final = unflatten(traj.states[-1], state0.frequencies)
    clusters = None
    if cluster_window is not None:
        clusters = detect_clusters(mean_velocities(traj, N, cluster_window), velocity_tol)
    return EnsembleRun(p, cfg, series, final, traj, clusters)


def mean_velocities(traj: Trajectory, N: int, window: float) -> np.ndarray:
    """Phase advance over the last ``window`` time units divided by its length."""
    t_end = traj.times[-1]
    i0 = int(np.searchsorted(traj.times, t_end - window))
    i0 = min(i0, len(traj.times) - 2)
    dt = traj.times[-1] - traj.times[i0]
    return (traj.states[-1, :N] - traj.states[i0, :N]) / dt


def detect_clusters(velocities, velocity_tol: float) -> ClusterReport:
    """Group (time-averaged) velocities that agree within ``velocity_tol``.

    Sorted velocities are scanned once; a value joins the current group while
    it stays within ``velocity_tol`` of the group's smallest member, so no
    group spreads wider than the tolerance. Clusters come back largest first.
    """
    v = np.asarray(velocities, dtype=float)
    order = np.argsort(v, kind="stable")
    groups: list[list[int]] = [[int(order[0])]]
    for b in order[1:]:
        if v[b] - v[groups[-1][0]] <= velocity_tol:
            groups[-1].append(int(b))
        else:
            groups.append([int(b)])
    groups.sort(key=lambda g: (-len(g), min(g)))
    groups = [sorted(g) for g in groups]
    return ClusterReport(groups, [float(v[g].mean()) for g in groups])
