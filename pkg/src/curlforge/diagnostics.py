"""Invariant monitors, phase-volume and conformal checks, force power and linear stability."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .catalog import ENTRIES, SystemDefinition, linear_matrix
from .contact import contact_path, herglotz_el_residual, herglotz_invariant_series
from .core import as_vector, fd_jacobian
from .integrate import Trajectory, integrate

STABILITY_THRESHOLD = 1e-9
POWER_THRESHOLD = 1e-10

# Default tolerances of the invariant suite.
CONSERVATION_TOL = 1e-7
RATE_TOL = 1e-4
HERGLOTZ_TOL = 1e-6
RESIDUAL_TOL = 1e-4
NONCONSERVED_MIN_VARIATION = 1e-2


@dataclass
class InvariantEntry:
    name: str
    initial: float
    max_abs_drift: float
    max_rel_drift: float
    tolerance: float
    passed: bool
    note: str = ""

    def to_json(self) -> dict:
        d = {"name": self.name, "initial": self.initial, "max_abs_drift": self.max_abs_drift,
             "max_rel_drift": self.max_rel_drift, "tolerance": self.tolerance, "pass": self.passed}
        if self.note:
            d["note"] = self.note
        return d


@dataclass
class InvariantReport:
    system: str
    params: dict
    entries: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @property
    def verdict(self) -> bool:
        return all(e.passed for e in self.entries)

    def entry(self, name: str) -> InvariantEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def to_json(self) -> dict:
        return {
            "system": self.system,
            "params": {k: v for k, v in self.params.items() if not callable(v)},
            "invariants": [e.to_json() for e in self.entries],
            "verdict": "pass" if self.verdict else "fail",
            **({"metadata": self.metadata} if self.metadata else {}),
        }


def drift_entry(name: str, series, tolerance: float, note: str = "") -> InvariantEntry:
    """Conservation entry: relative drift against the initial value, absolute below 1e-8."""
    series = np.asarray(series, dtype=float)
    init = float(series[0])
    abs_drift = float(np.max(np.abs(series - init)))
    rel = abs_drift / abs(init) if abs(init) >= 1e-8 else abs_drift
    return InvariantEntry(name, init, abs_drift, rel, tolerance, rel <= tolerance, note)


def variation_entry(name: str, series, min_variation: float) -> InvariantEntry:
    """Entry for a quantity expected NOT to be conserved: passes when it varies."""
    e = drift_entry(name, series, min_variation)
    e.passed = e.max_abs_drift > min_variation
    e.note = "not conserved (expected)" if e.passed else "unexpectedly conserved"
    return e


def rate_entry(name: str, measured, predicted, tolerance: float, note: str = "") -> InvariantEntry:
    """Agreement between a measured and a predicted rate, relative to the largest predicted value."""
    measured = np.asarray(measured, dtype=float)
    predicted = np.asarray(predicted, dtype=float)
    err = float(np.max(np.abs(measured - predicted)))
    scale = float(np.max(np.abs(predicted)))
    rel = err / scale if scale >= 1e-8 else err
    return InvariantEntry(name, float(predicted[0]), err, rel, tolerance, rel <= tolerance, note)


def grid_derivative(series, dt: float) -> np.ndarray:
    """Fourth-order central differences on interior samples (two trimmed at each end)."""
    f = np.asarray(series, dtype=float)
    if f.size < 5:
        raise ValueError("need at least 5 samples")
    return (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * dt)


def observable_series(sys: SystemDefinition, traj: Trajectory, name: str) -> np.ndarray:
    try:
        obs = sys.observables[name]
    except KeyError:
        raise ValueError(f"{sys.name} has no {name} observable") from None
    return np.array([obs(s, t) for s, t in zip(traj.states, traj.times)])


def energy_series(sys: SystemDefinition, traj: Trajectory) -> np.ndarray:
    return observable_series(sys, traj, "energy")


def angular_momentum_series(sys: SystemDefinition, traj: Trajectory) -> np.ndarray:
    """x y_dot - y x_dot with velocities from the system's own q-equations."""
    if sys.n != 2:
        raise ValueError(f"angular momentum needs a planar system; {sys.name} has n={sys.n}")
    return observable_series(sys, traj, "angular_momentum")


def energy_rate_series(sys: SystemDefinition, traj: Trajectory) -> np.ndarray:
    if sys.energy_rate is None:
        raise ValueError(f"{sys.name} has no predicted energy rate")
    return np.array([sys.energy_rate(s, t) for s, t in zip(traj.states, traj.times)])


def divergence(sys, state, t: float = 0.0) -> float:
    rhs = sys.rhs if hasattr(sys, "rhs") else sys
    return float(np.trace(fd_jacobian(rhs, as_vector(state), t)))


def symplectic_pairing(u, w) -> float:
    """Canonical Omega(u, w) = sum_i (u_qi w_pi - u_pi w_qi)."""
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    n = u.size // 2
    return float(u[:n] @ w[n:2 * n] - u[n:2 * n] @ w[:n])


CONFORMAL_FAMILY = ("conformal_curl", "radial_curl", "azimuthal_curl", "kapitsa")


def conformal_factor_check(sys: SystemDefinition, x0, v1, v2, T: float, dt: float = 1e-3) -> float:
    """Omega(v1(T), v2(T)) / Omega(v1(0), v2(0)) under the variational flow.

    State and both tangent vectors are integrated jointly; the tangent
    equation uses central-difference Jacobians of the right-hand side.
    """
    if sys.name not in CONFORMAL_FAMILY:
        raise ValueError(f"{sys.name} is not in the conformal family {CONFORMAL_FAMILY}")
    d = sys.dim
    x0, v1, v2 = as_vector(x0), as_vector(v1), as_vector(v2)

    def joint(y, t):
        x = y[:d]
        J = fd_jacobian(sys.rhs, x, t)
        return np.concatenate([sys.rhs(x, t), J @ y[d:2 * d], J @ y[2 * d:]])

    traj = integrate(joint, np.concatenate([x0, v1, v2]), 0.0, T, dt)
    end = traj.states[-1]
    omega0 = symplectic_pairing(v1, v2)
    if abs(omega0) < 1e-14:
        raise ValueError("tangent vectors span zero symplectic area")
    return symplectic_pairing(end[d:2 * d], end[2 * d:]) / omega0


def power_classification(forces, velocities, threshold: float = POWER_THRESHOLD) -> str:
    """Thomson-Tait class of a force from the sign pattern of F . q_dot."""
    F = np.atleast_2d(np.asarray(forces, dtype=float))
    V = np.atleast_2d(np.asarray(velocities, dtype=float))
    if F.size == 0 or V.size == 0:
        raise ValueError("empty input")
    if F.shape != V.shape:
        raise ValueError("forces and velocities must have the same shape")
    power = np.sum(F * V, axis=1)
    hi, lo = float(np.max(power)), float(np.min(power))
    if hi <= threshold and lo >= -threshold:
        return "gyroscopic"
    if hi <= threshold:
        return "dissipative"
    if lo >= -threshold:
        return "accelerating"
    return "indefinite"


@dataclass
class StabilityResult:
    matrix: np.ndarray
    eigenvalues: np.ndarray
    max_real_part: float
    classification: str
    params: dict = field(default_factory=dict)

    def char_poly_residual(self) -> float:
        coeffs = np.poly(self.matrix)
        scale = np.polyval(np.abs(coeffs), np.abs(self.eigenvalues))
        return float(np.max(np.abs(np.polyval(coeffs, self.eigenvalues)) / np.maximum(scale, 1.0)))


def classify_eigenvalues(eigs, threshold: float = STABILITY_THRESHOLD) -> str:
    re = np.real(eigs)
    if np.max(re) > threshold:
        return "unstable"
    if np.max(re) < -threshold:
        return "asymptotically-stable"
    on_axis = np.abs(re) <= threshold
    if np.all(on_axis) and np.all(np.abs(eigs) > threshold):
        return "stable-center"
    return "marginal"


def stability_of_matrix(M: np.ndarray, threshold: float = STABILITY_THRESHOLD, params=None) -> StabilityResult:
    eigs = np.linalg.eigvals(M)
    order = np.lexsort((np.imag(eigs), np.real(eigs)))
    eigs = eigs[order]
    return StabilityResult(M, eigs, float(np.max(np.real(eigs))), classify_eigenvalues(eigs, threshold),
                           dict(params or {}))


def linear_stability(name: str, params: Optional[dict] = None, threshold: float = STABILITY_THRESHOLD) -> StabilityResult:
    M = linear_matrix(name, params)
    full = dict(ENTRIES[name].schema)
    full.update(params or {})
    return stability_of_matrix(M, threshold, full)


def run_invariant_suite(sys: SystemDefinition, traj: Trajectory) -> InvariantReport:
    """Every invariant check that applies to ``sys`` on a trajectory it generated."""
    report = InvariantReport(sys.name, dict(sys.params),
                             metadata={"t0": float(traj.times[0]), "t1": float(traj.times[-1]),
                                       "dt": traj.dt, "samples": len(traj)})
    for name in sys.conserved:
        report.entries.append(drift_entry(name, observable_series(sys, traj, name), CONSERVATION_TOL))
    for name in sys.nonconserved:
        if name == "energy" and sys.energy_rate is not None:
            continue
        report.entries.append(variation_entry(name, observable_series(sys, traj, name),
                                              NONCONSERVED_MIN_VARIATION))
    if sys.pure_curl:
        divs = [abs(divergence(sys, s, t)) for s, t in zip(traj.states[::max(1, len(traj) // 32)],
                                                         traj.times[::max(1, len(traj) // 32)])]
        report.entries.append(InvariantEntry("phase_volume", 0.0, max(divs), max(divs), 1e-10,
                                             max(divs) <= 1e-10, "divergence of the flow"))
    if sys.energy_rate is not None and len(traj) >= 5:
        H = energy_series(sys, traj)
        measured = grid_derivative(H, traj.dt)
        predicted = energy_rate_series(sys, traj)[2:-2]
        label = {"metriplectic": "metriplectic_energy_rate", "gyro_metriplectic": "metriplectic_energy_rate",
                 "contact": "contact_energy_rate", "galley": "galley_energy_rate"}[sys.formulation]
        report.entries.append(rate_entry(label, measured, predicted, RATE_TOL, "dH/dt vs predicted rate"))
    if sys.formulation == "contact":
        if not callable(sys.params.get("gamma")):
            I = herglotz_invariant_series(sys.structure, traj)
            report.entries.append(drift_entry("herglotz_invariant", I, HERGLOTZ_TOL))
        res = herglotz_el_residual(sys.extras["lagrangian"], contact_path(sys.structure, traj))
        report.entries.append(InvariantEntry("herglotz_el_residual", 0.0, float(np.max(res)), float(np.max(res)),
                                             RESIDUAL_TOL, float(np.max(res)) <= RESIDUAL_TOL))
    return report


def config_divergence(a: Trajectory, b: Trajectory, n: int = 2) -> float:
    if a.times.shape != b.times.shape or np.max(np.abs(a.times - b.times)) > 1e-12:
        raise ValueError("trajectories are on different grids")
    return float(np.max(np.abs(a.states[:, :n] - b.states[:, :n])))

