"""Initial-value integration and section-crossing detection.

Two explicit methods are provided: classical fixed-step RK4 and the
Dormand-Prince 5(4) embedded pair with local error control. Both work on
1-D float state vectors and return every recorded sample as a
:class:`Trajectory`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np

__all__ = [
    "VectorField",
    "IntegratorConfig",
    "Trajectory",
    "CrossingEvent",
    "IntegrationError",
    "integrate",
    "rk4_step",
    "detect_crossings",
    "integrate_crossings",
]

Method = Literal["rk4", "adaptive"]


class IntegrationError(RuntimeError):
    """Integration stopped early; ``last_time`` is the last finite sample."""

    def __init__(self, message: str, last_time: float, trajectory: "Trajectory | None" = None):
        super().__init__(f"{message} (last valid t={last_time:.6g})")
        self.last_time = last_time
        self.trajectory = trajectory


@dataclass(frozen=True)
class VectorField:
    dimension: int
    evaluate: Callable[[float, np.ndarray], np.ndarray]

    def __call__(self, t: float, x: np.ndarray) -> np.ndarray:
        return self.evaluate(t, x)


@dataclass(frozen=True)
class IntegratorConfig:
    """Integration settings.

    ``step`` is the fixed step for ``rk4`` and the first trial step for
    ``adaptive``. ``sample_interval`` (optional) restricts recording to
    multiples of that interval; adaptive steps are shortened to land on them.
    """

    method: Method = "adaptive"
    horizon: float = 1000.0
    step: float = 1e-2
    abs_tol: float = 1e-9
    rel_tol: float = 1e-9
    max_steps: int = 10_000_000
    sample_interval: float | None = None

    def __post_init__(self):
        if self.method not in ("rk4", "adaptive"):
            raise ValueError(f"unknown method {self.method!r}")
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if not self.step > 0:
            raise ValueError("step must be positive")
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("abs_tol and rel_tol must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.sample_interval is not None and not self.sample_interval > 0:
            raise ValueError("sample_interval must be positive")


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # shape (len(times), dimension)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=float)
        if self.states.ndim != 2 or len(self.times) != len(self.states):
            raise ValueError("states must be (n_samples, dimension) matching times")

    def __len__(self) -> int:
        return len(self.times)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


@dataclass(frozen=True)
class CrossingEvent:
    time: float
    state: np.ndarray = field(repr=False)
    direction: Literal["up", "down"]


def rk4_step(f: Callable[[float, np.ndarray], np.ndarray], t: float, x: np.ndarray, h: float) -> np.ndarray:
    k1 = f(t, x)
    k2 = f(t + 0.5 * h, x + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, x + 0.5 * h * k2)
    k4 = f(t + h, x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


# Dormand-Prince 5(4) tableau.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


def _check_x0(fld: VectorField, x0) -> np.ndarray:
    x = np.array(x0, dtype=float).reshape(-1)
    if x.shape[0] != fld.dimension:
        raise ValueError(f"x0 has dimension {x.shape[0]}, field expects {fld.dimension}")
    if not np.all(np.isfinite(x)):
        raise ValueError("x0 must be finite")
    return x


def integrate(fld: VectorField, x0, cfg: IntegratorConfig) -> Trajectory:
    """Integrate ``fld`` from ``x0`` over ``[0, cfg.horizon]``.

    Raises :class:`IntegrationError` when ``max_steps`` is exceeded or the
    state stops being finite.
    """
    x = _check_x0(fld, x0)
    if cfg.method == "rk4":
        return _integrate_rk4(fld, x, cfg)
    return _integrate_dopri(fld, x, cfg)


def _integrate_rk4(fld: VectorField, x: np.ndarray, cfg: IntegratorConfig) -> Trajectory:
    n_steps = max(1, int(round(cfg.horizon / cfg.step)))
    if n_steps > cfg.max_steps:
        raise IntegrationError(f"{n_steps} steps needed, max_steps={cfg.max_steps}", 0.0)
    h = cfg.horizon / n_steps
    every = 1
    if cfg.sample_interval is not None:
        every = max(1, int(round(cfg.sample_interval / h)))
    n_rec = n_steps // every + 1 + (1 if n_steps % every else 0)
    times = np.empty(n_rec)
    states = np.empty((n_rec, x.shape[0]))
    times[0], states[0] = 0.0, x
    j = 1
    for i in range(1, n_steps + 1):
        x = rk4_step(fld.evaluate, (i - 1) * h, x, h)
        if not np.all(np.isfinite(x)):
            raise IntegrationError("non-finite state", times[j - 1], Trajectory(times[:j], states[:j]))
        if i % every == 0 or i == n_steps:
            times[j] = i * h
            states[j] = x
            j += 1
    return Trajectory(times[:j], states[:j])


def _integrate_dopri(fld: VectorField, x: np.ndarray, cfg: IntegratorConfig) -> Trajectory:
    f = fld.evaluate
    T = cfg.horizon
    t = 0.0
    h = min(cfg.step, T)
    times = [0.0]
    states = [x.copy()]
    next_sample = cfg.sample_interval if cfg.sample_interval is not None else None
    sample_idx = 1
    k = np.empty((7, x.shape[0]))
    k[0] = f(t, x)
    n_steps = 0
    while t < T:
        if n_steps >= cfg.max_steps:
            raise IntegrationError(f"max_steps={cfg.max_steps} exceeded", t, Trajectory(times, states))
        target = T if next_sample is None else min(T, next_sample)
        landing = t + h >= target * (1 - 1e-14)
        h_free = h
        if landing:
            h = target - t
        for s in range(1, 7):
            xs = x + h * np.dot(_A[s], k[:s])
            k[s] = f(t + _C[s] * h, xs)
        x_new = xs  # seventh stage is evaluated at the 5th-order solution (FSAL)
        err_vec = h * np.dot(_E, k)
        scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(x), np.abs(x_new))
        err = math.sqrt(float(np.mean((err_vec / scale) ** 2)))
        n_steps += 1
        if not np.all(np.isfinite(x_new)) or not math.isfinite(err):
            h *= 0.25
            if h < 1e-14 * max(1.0, T):
                raise IntegrationError("non-finite state", t, Trajectory(times, states))
            continue
        if err <= 1.0:
            t = target if landing else t + h
            x = x_new
            k[0] = k[6]
            if next_sample is None:
                times.append(t)
                states.append(x.copy())
            elif landing:
                times.append(t)
                states.append(x.copy())
                sample_idx += 1
                next_sample = sample_idx * cfg.sample_interval
                if next_sample > T * (1 - 1e-12):
                    next_sample = T
            factor = 10.0 if err == 0 else min(10.0, 0.9 * err ** -0.2)
            # a step clipped to land on a sample says little about the next one
            h = h_free if landing else h * factor
        else:
            h *= max(0.2, 0.9 * err ** -0.2)
        if h < 1e-14 * max(1.0, T):
            raise IntegrationError("step size underflow", t, Trajectory(times, states))
    return Trajectory(np.array(times), np.array(states))


# RK4 sub-step used to rebuild states inside a step during bisection
_REFINE_STEP = 1e-3


def _sign(v: float) -> int:
    return int(v > 0) - int(v < 0)


def detect_crossings(
    traj: Trajectory,
    event: Callable[[np.ndarray], float],
    refine_tol: float = 1e-10,
    fld: VectorField | None = None,
) -> list[CrossingEvent]:
    """Sign changes of ``event`` along ``traj``.

    Each change between recorded samples becomes one event. Its time is
    refined by bisection to ``refine_tol``; inside a step the state comes
    from a fresh RK4 step out of the left sample when ``fld`` is given,
    otherwise from linear interpolation. Touches that return to the same
    sign are ignored.
    """
    g = np.array([event(s) for s in traj.states], dtype=float)
    events: list[CrossingEvent] = []
    last_i = None
    last_sign = 0
    for i, gi in enumerate(g):
        si = _sign(gi)
        if si == 0:
            continue
        if last_sign != 0 and si != last_sign:
            direction = "up" if si > 0 else "down"
            if i - last_i > 1:
                # landed exactly on the section at an intermediate sample
                j = last_i + 1
                events.append(CrossingEvent(float(traj.times[j]), traj.states[j].copy(), direction))
            else:
                t, x = _refine(traj, last_i, event, refine_tol, fld)
                events.append(CrossingEvent(t, x, direction))
        last_i, last_sign = i, si
    return events


def _refine(traj, i, event, tol, fld):
    t0, t1 = float(traj.times[i]), float(traj.times[i + 1])
    x0, x1 = traj.states[i], traj.states[i + 1]
    s0 = _sign(event(x0))

    def state_at(tau):
        if fld is None:
            w = tau / (t1 - t0)
            return (1 - w) * x0 + w * x1
        n = max(1, int(math.ceil(tau / _REFINE_STEP)))
        h = tau / n
        x = x0
        for j in range(n):
            x = rk4_step(fld.evaluate, t0 + j * h, x, h)
        return x

    lo, hi = 0.0, t1 - t0
    x_hi = x1
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        xm = state_at(mid)
        sm = _sign(event(xm))
        if sm == 0:
            return t0 + mid, xm
        if sm == s0:
            lo = mid
        else:
            hi, x_hi = mid, xm
    return t0 + hi, x_hi


def integrate_crossings(
    fld: VectorField,
    x0,
    cfg: IntegratorConfig,
    event: Callable[[np.ndarray], float],
    refine_tol: float = 1e-10,
) -> tuple[Trajectory, list[CrossingEvent]]:
    traj = integrate(fld, x0, cfg)
    return traj, detect_crossings(traj, event, refine_tol, fld)
