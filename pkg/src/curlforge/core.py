"""State types, field wrappers and central-difference derivative oracles."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

DEFAULT_SEED = 20230517
N_PROBES = 32


class EvaluationDomainError(ValueError):
    """A field returned a non-finite value on a finite-difference stencil."""

    def __init__(self, coordinate: int, value):
        self.coordinate = coordinate
        super().__init__(
            f"evaluation domain error: non-finite value {value!r} "
            f"when perturbing coordinate {coordinate}"
        )


@dataclass(frozen=True)
class PhaseState:
    """Positions, momenta and (for contact systems) the Herglotz action z."""

    q: np.ndarray
    p: np.ndarray
    z: Optional[float] = None

    def __post_init__(self):
        q = np.atleast_1d(np.asarray(self.q, dtype=float))
        p = np.atleast_1d(np.asarray(self.p, dtype=float))
        if q.shape != p.shape:
            raise ValueError(f"dim(q)={q.size} differs from dim(p)={p.size}")
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(p))):
            raise ValueError("PhaseState entries must be finite")
        if self.z is not None and not np.isfinite(self.z):
            raise ValueError("z must be finite")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)
        if self.z is not None:
            object.__setattr__(self, "z", float(self.z))

    @property
    def n(self) -> int:
        return self.q.size

    @property
    def has_z(self) -> bool:
        return self.z is not None

    def to_vector(self) -> np.ndarray:
        parts = [self.q, self.p]
        if self.z is not None:
            parts.append([self.z])
        return np.concatenate(parts)

    @classmethod
    def from_vector(cls, v, n: int, has_z: bool = False) -> "PhaseState":
        v = np.asarray(v, dtype=float)
        expected = 2 * n + (1 if has_z else 0)
        if v.size != expected:
            raise ValueError(f"expected a vector of length {expected}, got {v.size}")
        return cls(v[:n], v[n:2 * n], float(v[2 * n]) if has_z else None)


def as_vector(x) -> np.ndarray:
    """Flatten a PhaseState or array-like into a float vector."""
    if isinstance(x, PhaseState):
        return x.to_vector()
    return np.atleast_1d(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class ScalarField:
    """A real function of (state vector, t), with an optional analytic gradient.

    Autonomous fields simply ignore ``t``.
    """

    fn: Callable[[np.ndarray, float], float]
    grad_fn: Optional[Callable[[np.ndarray, float], np.ndarray]] = None
    label: str = ""

    def __call__(self, x, t: float = 0.0) -> float:
        return float(self.fn(as_vector(x), t))

    def gradient(self, x, t: float = 0.0) -> np.ndarray:
        x = as_vector(x)
        if self.grad_fn is not None:
            return np.asarray(self.grad_fn(x, t), dtype=float)
        return fd_gradient(self, x, t)


@dataclass(frozen=True)
class ForceField2D:
    """Planar force (F_x, F_y) as a function of (x, y, t)."""

    components: Callable[[float, float, float], tuple]
    label: str = ""

    def __call__(self, x: float, y: float, t: float = 0.0) -> np.ndarray:
        return np.asarray(self.components(x, y, t), dtype=float)


def default_step(x: np.ndarray) -> float:
    return 1e-6 * max(1.0, float(np.max(np.abs(x))) if x.size else 1.0)


def _evaluate(f, x, t):
    if isinstance(f, ScalarField):
        return f.fn(x, t)
    return f(x, t)


def fd_gradient(f, x, t: float = 0.0, h: Optional[float] = None) -> np.ndarray:
    """Central-difference gradient of a scalar field over all state coordinates."""
    x = as_vector(x)
    h = default_step(x) if h is None else h
    if h <= 0:
        raise ValueError("step h must be positive")
    g = np.empty(x.size)
    for j in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[j] += h
        xm[j] -= h
        fp = _evaluate(f, xp, t)
        fm = _evaluate(f, xm, t)
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise EvaluationDomainError(j, fp if not np.isfinite(fp) else fm)
        g[j] = (fp - fm) / (2.0 * h)
    return g


def fd_jacobian(v: Callable, x, t: float = 0.0, h: Optional[float] = None) -> np.ndarray:
    """Central-difference Jacobian; column j holds dv/dx_j."""
    x = as_vector(x)
    h = default_step(x) if h is None else h
    if h <= 0:
        raise ValueError("step h must be positive")
    cols = []
    for j in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[j] += h
        xm[j] -= h
        vp = np.asarray(v(xp, t), dtype=float)
        vm = np.asarray(v(xm, t), dtype=float)
        if not (np.all(np.isfinite(vp)) and np.all(np.isfinite(vm))):
            raise EvaluationDomainError(j, vp if not np.all(np.isfinite(vp)) else vm)
        cols.append((vp - vm) / (2.0 * h))
    return np.column_stack(cols)


def curl2d(F: Callable, x: float, y: float, t: float = 0.0, h: Optional[float] = None) -> float:
    """Scalar curl dF_y/dx - dF_x/dy by central differences."""
    h = default_step(np.array([x, y])) if h is None else h
    if h <= 0:
        raise ValueError("step h must be positive")
    fxp = np.asarray(F(x + h, y, t), dtype=float)
    fxm = np.asarray(F(x - h, y, t), dtype=float)
    fyp = np.asarray(F(x, y + h, t), dtype=float)
    fym = np.asarray(F(x, y - h, t), dtype=float)
    for coord, a, b in ((0, fxp, fxm), (1, fyp, fym)):
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise EvaluationDomainError(coord, a if not np.all(np.isfinite(a)) else b)
    return float((fxp[1] - fxm[1]) / (2 * h) - (fyp[0] - fym[0]) / (2 * h))


def probe_seed() -> int:
    """Probe-set seed; CURLFORGE_SEED overrides the built-in default."""
    raw = os.environ.get("CURLFORGE_SEED")
    if raw is None or raw.strip() == "":
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError as exc:
        raise ValueError(f"CURLFORGE_SEED must be an integer, got {raw!r}") from exc


def probe_points(dim: int, n: int = N_PROBES, seed: Optional[int] = None,
                 low: float = -1.0, high: float = 1.0) -> np.ndarray:
    """Deterministic probe states, uniform in [low, high]^dim."""
    rng = np.random.default_rng(probe_seed() if seed is None else seed)
    return rng.uniform(low, high, size=(n, dim))


@dataclass
class GradientCheck:
    max_rel_error: float
    worst_point: np.ndarray
    passed: bool
    errors: list = field(default_factory=list)


def check_gradient(f: ScalarField, dim: int, t: float = 0.0, rtol: float = 1e-5,
                   points: Optional[np.ndarray] = None) -> GradientCheck:
    """Compare an analytic gradient with the central-difference oracle on probes.

    The relative error uses max(1, |grad|) as scale so that vanishing
    gradients are judged absolutely.
    """
    if f.grad_fn is None:
        raise ValueError(f"field {f.label!r} has no analytic gradient")
    pts = probe_points(dim) if points is None else points
    worst, worst_pt, errs = 0.0, pts[0], []
    for x in pts:
        ga = np.asarray(f.grad_fn(x, t), dtype=float)
        gf = fd_gradient(f, x, t)
        err = float(np.max(np.abs(ga - gf)) / max(1.0, float(np.max(np.abs(gf)))))
        errs.append(err)
        if err > worst:
            worst, worst_pt = err, x
    return GradientCheck(worst, worst_pt, worst <= rtol, errs)
