"""Region demarcation in the (alpha, omega) plane.

Cells with ``alpha < 2 omega`` have no equilibria and are labelled Omega1
directly. Every other cell is simulated from random starts on the section
``phi = 0`` and the number of section sheets (distinct multiples of 2 pi of
the lifted phase) each trajectory crosses is counted. A trajectory that
settles on an equilibrium crosses one or two sheets; one that shadows the
heteroclinic connection keeps rotating.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Literal

import numpy as np

from . import _kernels
from .ode import IntegratorConfig, integrate_crossings
from .pair import PairParams, pair_field

__all__ = [
    "SweepConfig",
    "PointResult",
    "SweepResult",
    "ANCHORS",
    "initial_conditions",
    "classify_point",
    "sweep",
    "sheets_crossed",
    "row_transitions",
]

Label = Literal["Omega1", "Omega2", "Omega3", "unclassified"]

# (alpha, omega, expected label) at unit mass
ANCHORS = ((5.0, 3.0, "Omega1"), (10.0, 3.0, "Omega2"), (15.0, 3.0, "Omega3"))


@dataclass(frozen=True)
class SweepConfig:
    alpha_range: tuple[float, float] = (0.0, 36.0)
    omega_range: tuple[float, float] = (0.0, 2 * math.pi)
    grid: tuple[int, int] = (150, 150)  # (n_alpha, n_omega)
    n_initial_conditions: int = 20
    horizon: float = 1000.0
    seed: int = 0
    crossing_threshold: int = 2
    m: float = 1.0
    abs_tol: float = 1e-9
    rel_tol: float = 1e-9
    max_steps: int = 10_000_000
    # early exit once |f| < still_tol at still_count consecutive checks
    still_tol: float = 1e-8
    still_count: int = 10
    check_interval: float = 1.0

    def __post_init__(self):
        a0, a1 = self.alpha_range
        w0, w1 = self.omega_range
        if not (a1 > a0 >= 0 and w1 > w0 >= 0):
            raise ValueError("alpha_range and omega_range must be nonempty and nonnegative")
        if min(self.grid) < 2:
            raise ValueError("grid dimensions must be >= 2")
        if self.n_initial_conditions < 1:
            raise ValueError("n_initial_conditions must be >= 1")
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if self.crossing_threshold < 1:
            raise ValueError("crossing_threshold must be >= 1")
        if not self.m > 0:
            raise ValueError("m must be positive")

    @property
    def alphas(self) -> np.ndarray:
        # closed interval
        return np.linspace(*self.alpha_range, self.grid[0])

    @property
    def omegas(self) -> np.ndarray:
        # half-open interval
        w0, w1 = self.omega_range
        return w0 + (w1 - w0) * np.arange(self.grid[1]) / self.grid[1]

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class PointResult:
    alpha: float
    omega: float
    label: Label
    mean_crossings: float
    max_crossings: int
    counts: np.ndarray = field(repr=False)  # sheets crossed, per start
    raw_counts: np.ndarray = field(repr=False)  # every sign change, per start
    simulated: bool = True


@dataclass
class SweepResult:
    config: SweepConfig
    alphas: np.ndarray
    omegas: np.ndarray
    labels: np.ndarray  # (n_omega, n_alpha) of str
    mean_crossings: np.ndarray
    max_crossings: np.ndarray
    counts: np.ndarray  # (n_omega, n_alpha, n_ic), -1 where not simulated

    def rows(self):
        """One record per cell, alpha varying fastest."""
        for j, w in enumerate(self.omegas):
            for i, a in enumerate(self.alphas):
                yield (float(a), float(w), str(self.labels[j, i]), float(self.mean_crossings[j, i]), int(self.max_crossings[j, i]))

    def label_at(self, alpha: float, omega: float) -> str:
        i = int(np.argmin(np.abs(self.alphas - alpha)))
        j = int(np.argmin(np.abs(self.omegas - omega)))
        return str(self.labels[j, i])


def initial_conditions(cfg: SweepConfig, cell_index: int) -> np.ndarray:
    """Starts on the section rectangle {0} x [-pi, pi)^2 for one cell.

    The stream depends only on (seed, cell_index), never on evaluation order.
    """
    rng = np.random.default_rng([cfg.seed, cell_index])
    gk = rng.uniform(-np.pi, np.pi, size=(cfg.n_initial_conditions, 2))
    return np.column_stack([np.zeros(cfg.n_initial_conditions), gk])


def sheets_crossed(events) -> int:
    """Distinct 2 pi multiples passed by the lifted phase in ``events``."""
    if not events:
        return 0
    sheets = [round(e.state[0] / (2 * math.pi)) for e in events]
    return max(sheets) - min(sheets) + 1


def _label(counts: np.ndarray, threshold: int) -> Label:
    return "Omega3" if int(counts.max()) <= threshold else "Omega2"


def classify_point(
    alpha: float,
    omega: float,
    cfg: SweepConfig = SweepConfig(),
    cell_index: int = 0,
    engine: Literal["compiled", "python"] = "compiled",
) -> PointResult:
    """Label one parameter point.

    ``engine="python"`` runs the generic integrator and crossing detector
    instead of the compiled kernel (slow; for cross-checks).
    """
    alpha, omega = float(alpha), float(omega)
    n = cfg.n_initial_conditions
    if alpha < 2 * omega:
        empty = np.full(n, -1, dtype=np.int64)
        return PointResult(alpha, omega, "Omega1", math.nan, -1, empty, empty.copy(), simulated=False)
    x0s = initial_conditions(cfg, cell_index)
    if engine == "compiled":
        raw, sheets, _, status = _kernels.batch_crossings(
            float(cfg.m), omega, alpha, x0s, float(cfg.horizon), float(cfg.abs_tol), float(cfg.rel_tol),
            0.01, int(cfg.max_steps), float(cfg.check_interval), float(cfg.still_tol), int(cfg.still_count),
        )
        failed = bool(np.any((status == _kernels.MAX_STEPS) | (status == _kernels.NON_FINITE)))
    elif engine == "python":
        p = PairParams(cfg.m, omega, alpha)
        icfg = IntegratorConfig(horizon=cfg.horizon, abs_tol=cfg.abs_tol, rel_tol=cfg.rel_tol, max_steps=cfg.max_steps)
        raw = np.empty(n, dtype=np.int64)
        sheets = np.empty(n, dtype=np.int64)
        failed = False
        for j, x0 in enumerate(x0s):
            try:
                _, ev = integrate_crossings(pair_field(p), x0, icfg, lambda x: math.sin(0.5 * x[0]))
            except RuntimeError:
                failed = True
                raw[j] = sheets[j] = -1
                continue
            raw[j] = len(ev)
            sheets[j] = sheets_crossed(ev)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    label: Label = "unclassified" if failed else _label(sheets, cfg.crossing_threshold)
    return PointResult(alpha, omega, label, float(np.mean(sheets)), int(sheets.max()), sheets, raw)


def _sweep_row(cfg: SweepConfig, j: int):
    n_alpha = cfg.grid[0]
    omega = float(cfg.omegas[j])
    out = []
    for i, alpha in enumerate(cfg.alphas):
        out.append(classify_point(float(alpha), omega, cfg, cell_index=j * n_alpha + i))
    return out


def sweep(cfg: SweepConfig = SweepConfig(), jobs: int = 1, progress=None) -> SweepResult:
    """Classify every grid cell. Results do not depend on ``jobs``."""
    n_alpha, n_omega = cfg.grid
    if jobs == 1:
        rows = []
        for j in range(n_omega):
            rows.append(_sweep_row(cfg, j))
            if progress is not None:
                progress(j + 1, n_omega)
    else:
        from joblib import Parallel, delayed

        rows = Parallel(n_jobs=jobs)(delayed(_sweep_row)(cfg, j) for j in range(n_omega))
    labels = np.empty((n_omega, n_alpha), dtype=object)
    mean = np.full((n_omega, n_alpha), np.nan)
    mx = np.full((n_omega, n_alpha), -1, dtype=np.int64)
    counts = np.full((n_omega, n_alpha, cfg.n_initial_conditions), -1, dtype=np.int64)
    for j, row in enumerate(rows):
        for i, r in enumerate(row):
            labels[j, i] = r.label
            mean[j, i] = r.mean_crossings
            mx[j, i] = r.max_crossings
            counts[j, i] = r.counts
    return SweepResult(cfg, cfg.alphas, cfg.omegas, labels, mean, mx, counts)


_ORDER = {"Omega1": 1, "Omega2": 2, "Omega3": 3}


def row_transitions(result: SweepResult) -> list[dict]:
    """Check each omega row for the Omega1 -> Omega2 -> Omega3 progression.

    Returns one record per row with the Omega2 -> Omega3 switch points and
    whether the row is monotone. Violations are reported, not raised.
    """
    report = []
    for j, w in enumerate(result.omegas):
        seq = [_ORDER.get(str(lbl), 0) for lbl in result.labels[j]]
        known = [s for s in seq if s]
        monotone = all(b >= a for a, b in zip(known, known[1:]))
        switches = [
            float(result.alphas[i + 1])
            for i in range(len(seq) - 1)
            if seq[i] == 2 and seq[i + 1] == 3
        ]
        report.append({"omega": float(w), "monotone": monotone, "omega2_to_omega3": switches})
    return report
