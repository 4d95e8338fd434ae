"""Fixed-step RK4 integration on a uniform grid."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from .core import as_vector


class BlowUpError(RuntimeError):
    """Non-finite RK stage; carries the last finite state."""

    def __init__(self, t: float, last_index: int = -1, last_time: Optional[float] = None,
                 last_state: Optional[np.ndarray] = None):
        self.t = t
        self.last_index = last_index
        self.last_time = t if last_time is None else last_time
        self.last_state = last_state
        super().__init__(f"blow-up at t={t!r} (last finite sample {last_index} at t={self.last_time!r})")


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    system_name: str = ""
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=float)
        if self.times.ndim != 1 or self.states.ndim != 2 or self.times.size != self.states.shape[0]:
            raise ValueError("times and states must have matching lengths")
        if self.times.size < 2:
            raise ValueError("a trajectory needs at least 2 samples")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    def __len__(self):
        return self.times.size

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    def column(self, j: int) -> np.ndarray:
        return self.states[:, j]


def rk4_step(rhs: Callable, x, t: float, dt: float) -> np.ndarray:
    if not dt > 0:
        raise ValueError("dt must be positive")
    x = as_vector(x)
    # Overflow is detected below and reported as BlowUpError, not as a warning.
    with np.errstate(over="ignore", invalid="ignore"):
        k1 = np.asarray(rhs(x, t), dtype=float)
        k2 = np.asarray(rhs(x + 0.5 * dt * k1, t + 0.5 * dt), dtype=float)
        k3 = np.asarray(rhs(x + 0.5 * dt * k2, t + 0.5 * dt), dtype=float)
        k4 = np.asarray(rhs(x + dt * k3, t + dt), dtype=float)
        out = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise BlowUpError(t)
    return out


def n_steps(t0: float, t1: float, dt: float) -> int:
    """ceil((t1 - t0) / dt), treating near-integer ratios as exact."""
    ratio = (t1 - t0) / dt
    nearest = round(ratio)
    if nearest >= 1 and abs(ratio - nearest) <= 1e-9 * nearest:
        return int(nearest)
    return int(math.ceil(ratio))


def integrate(sys, x0, t0: float, t1: float, dt: float) -> Trajectory:
    """Integrate ``sys.rhs`` (or a bare rhs callable) from t0 to t1.

    The grid is t0 + k dt; the last step is shortened to land on t1.
    """
    if not t1 > t0:
        raise ValueError("t1 must exceed t0")
    if not (dt > 0 and dt <= t1 - t0):
        raise ValueError("dt must satisfy 0 < dt <= t1 - t0")
    rhs = sys.rhs if hasattr(sys, "rhs") else sys
    m = n_steps(t0, t1, dt)
    times = t0 + dt * np.arange(m + 1)
    times[-1] = t1
    x = as_vector(x0).copy()
    states = np.empty((m + 1, x.size))
    states[0] = x
    for k in range(m):
        try:
            x = rk4_step(rhs, x, times[k], times[k + 1] - times[k])
        except BlowUpError as exc:
            raise BlowUpError(exc.t, k, float(times[k]), states[k].copy()) from None
        states[k + 1] = x
    return Trajectory(times, states, getattr(sys, "name", ""), dict(getattr(sys, "params", {}) or {}))


def sweep(fn: Callable, items: Iterable, workers: int = 1) -> list:
    """Map ``fn`` over ``items``; results keep input order whatever the worker count."""
    items = list(items)
    if workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
