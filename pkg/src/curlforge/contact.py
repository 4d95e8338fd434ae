"""Contact Hamiltonian dynamics in Darboux coordinates (q, p, z) and the Herglotz side."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import ScalarField, as_vector, fd_gradient, probe_points


class IrregularLagrangianError(ValueError):
    pass


@dataclass(frozen=True)
class ContactSystem:
    """Contact Hamiltonian H over the 2n+1 coordinates (q, p, z)."""

    n: int
    H: ScalarField

    @property
    def dim(self) -> int:
        return 2 * self.n + 1

    def split_gradient(self, state, t: float):
        x = _with_z(state, self.n)
        g = self.H.gradient(x, t)
        n = self.n
        return x, g[:n], g[n:2 * n], g[2 * n]


def _with_z(state, n: int) -> np.ndarray:
    x = as_vector(state)
    if x.size == 2 * n:
        raise ValueError("missing z: contact systems need the Herglotz coordinate")
    if x.size != 2 * n + 1:
        raise ValueError(f"expected {2 * n + 1} coordinates (q, p, z), got {x.size}")
    return x


def contact_vector_field(sys: ContactSystem, state, t: float = 0.0) -> np.ndarray:
    """q_dot = H_p, p_dot = -H_q - p H_z, z_dot = p . H_p - H."""
    x, Hq, Hp, Hz = sys.split_gradient(state, t)
    p = x[sys.n:2 * sys.n]
    return np.concatenate([Hp, -Hq - p * Hz, [p @ Hp - sys.H(x, t)]])


def contact_energy_rate(sys: ContactSystem, state, t: float = 0.0) -> float:
    """dH/dt = -H dH/dz along the contact flow (autonomous H)."""
    x, _, _, Hz = sys.split_gradient(state, t)
    return -sys.H(x, t) * Hz


def herglotz_invariant_series(sys: ContactSystem, traj) -> np.ndarray:
    """I(t_k) = H(t_k) exp(int_0^t_k dH/dz), trapezoid rule on the trajectory grid."""
    times = np.asarray(traj.times)
    states = np.asarray(traj.states)
    if times.size == 0:
        raise ValueError("empty trajectory")
    H = np.array([sys.H(s, t) for s, t in zip(states, times)])
    Hz = np.array([sys.split_gradient(s, t)[3] for s, t in zip(states, times)])
    integral = np.concatenate([[0.0], np.cumsum(0.5 * (Hz[1:] + Hz[:-1]) * np.diff(times))])
    return H * np.exp(integral)


@dataclass(frozen=True)
class HerglotzLagrangian:
    """L(q, q_dot, z, t) for the Herglotz action z_dot = L.

    ``velocity_hessian`` may be supplied for the quadratic class; otherwise it
    is recovered from L by unit-step differences, which are exact for
    Lagrangians quadratic in the velocities.
    """

    n: int
    L: Callable[[np.ndarray, np.ndarray, float, float], float]
    velocity_hessian: Optional[np.ndarray] = None
    label: str = ""

    def __call__(self, q, qdot, z, t: float = 0.0) -> float:
        return float(self.L(np.atleast_1d(q), np.atleast_1d(qdot), float(z), t))

    def hessian(self) -> np.ndarray:
        if self.velocity_hessian is not None:
            return np.asarray(self.velocity_hessian, dtype=float)
        return _quadratic_hessian(self, np.zeros(self.n), 0.0, 0.0)

    def velocity_gradient_at_rest(self, q, z, t) -> np.ndarray:
        """dL/dq_dot at q_dot = 0; exact for quadratic L."""
        e = np.eye(self.n)
        return np.array([(self(q, e[i], z, t) - self(q, -e[i], z, t)) / 2.0 for i in range(self.n)])

    def partials(self, q, qdot, z, t):
        """(dL/dq, dL/dq_dot, dL/dz) by central differences."""
        n = self.n
        packed = np.concatenate([q, qdot, [z]])

        def f(x, tt):
            return self(x[:n], x[n:2 * n], x[2 * n], tt)

        g = fd_gradient(f, packed, t)
        return g[:n], g[n:2 * n], g[2 * n]


def _quadratic_hessian(lag: HerglotzLagrangian, q, z, t) -> np.ndarray:
    n = lag.n
    e = np.eye(n)
    L0 = lag(q, np.zeros(n), z, t)
    M = np.empty((n, n))
    for i in range(n):
        M[i, i] = lag(q, e[i], z, t) + lag(q, -e[i], z, t) - 2 * L0
        for j in range(i + 1, n):
            M[i, j] = M[j, i] = (lag(q, e[i] + e[j], z, t) - lag(q, e[i] - e[j], z, t)
                                 - lag(q, e[j] - e[i], z, t) + lag(q, -e[i] - e[j], z, t)) / 4.0
    return M


def check_regular(lag: HerglotzLagrangian, tol: float = 1e-10) -> np.ndarray:
    M = lag.hessian()
    if abs(np.linalg.det(M)) <= tol:
        raise IrregularLagrangianError("irregular Lagrangian: velocity Hessian is not invertible")
    return M


def fiber_derivative(lag: HerglotzLagrangian, q, qdot, z, t: float = 0.0):
    """(q, q_dot, z) -> (q, dL/dq_dot, z) for the quadratic class."""
    q = np.atleast_1d(np.asarray(q, dtype=float))
    qdot = np.atleast_1d(np.asarray(qdot, dtype=float))
    p = lag.hessian() @ qdot + lag.velocity_gradient_at_rest(q, z, t)
    return q, p, z


def legendre_map(lag: HerglotzLagrangian, validate: bool = True) -> ContactSystem:
    """H(q, p, z, t) = p . q_dot(p) - L with q_dot solved from p = dL/dq_dot."""
    n = lag.n
    M = check_regular(lag)
    Minv = np.linalg.inv(M)
    if validate:
        _check_quadratic(lag, M)

    def H(x, t):
        q, p, z = x[:n], x[n:2 * n], x[2 * n]
        qdot = Minv @ (p - lag.velocity_gradient_at_rest(q, z, t))
        return p @ qdot - lag(q, qdot, z, t)

    return ContactSystem(n, ScalarField(H, label=f"legendre({lag.label})"))


def _check_quadratic(lag: HerglotzLagrangian, M: np.ndarray, rtol: float = 1e-8):
    n = lag.n
    pts = probe_points(3 * n + 1, n=8)
    for x in pts:
        q, v, z = x[:n], 2 * x[n:2 * n], x[2 * n]
        g = lag.velocity_gradient_at_rest(q, z, 0.0)
        model = lag(q, np.zeros(n), z, 0.0) + g @ v + 0.5 * v @ M @ v
        actual = lag(q, v, z, 0.0)
        if abs(model - actual) > rtol * max(1.0, abs(actual)):
            raise IrregularLagrangianError(
                "Lagrangian is not quadratic in the velocities with constant Hessian")


@dataclass(frozen=True)
class ConfigPath:
    """Configuration-space samples (t, q, q_dot[, z]) on a uniform grid."""

    times: np.ndarray
    q: np.ndarray
    qdot: np.ndarray
    z: Optional[np.ndarray] = None


def contact_path(sys: ContactSystem, traj) -> ConfigPath:
    """Pull a contact trajectory back to (q, q_dot, z) with q_dot = dH/dp."""
    n = sys.n
    states = np.asarray(traj.states)
    times = np.asarray(traj.times)
    qdot = np.array([sys.split_gradient(s, t)[2] for s, t in zip(states, times)])
    return ConfigPath(times, states[:, :n], qdot, states[:, 2 * n])


def _grid_step(times: np.ndarray) -> float:
    if times.size < 3:
        raise ValueError("need at least 3 samples for grid derivatives")
    dts = np.diff(times)
    if np.max(np.abs(dts - dts[0])) > 1e-9 * max(1.0, abs(dts[0])):
        raise ValueError("residuals need a uniform time grid")
    return float(dts[0])


def herglotz_el_residual(lag: HerglotzLagrangian, path: ConfigPath) -> np.ndarray:
    """Max-norm of L_q - d/dt L_qdot + L_z L_qdot at each interior sample."""
    dt = _grid_step(path.times)
    N = path.times.size
    z = np.zeros(N) if path.z is None else path.z
    Lq, Lv, Lz = [], [], []
    for k in range(N):
        a, b, c = lag.partials(path.q[k], path.qdot[k], z[k], path.times[k])
        Lq.append(a)
        Lv.append(b)
        Lz.append(c)
    Lq, Lv, Lz = np.array(Lq), np.array(Lv), np.array(Lz)
    dLv = (Lv[2:] - Lv[:-2]) / (2 * dt)
    res = Lq[1:-1] - dLv + Lz[1:-1, None] * Lv[1:-1]
    return np.max(np.abs(res), axis=1)
