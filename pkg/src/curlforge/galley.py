"""Galley's doubled-variable nonconservative mechanics, reduced to the physical limit."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import ScalarField, as_vector, fd_gradient, probe_points
from .contact import ConfigPath, _grid_step

_CSTEP = 1e-20


def plus_minus_transform(q1, q2):
    """(q1, q2) -> (q_minus, q_plus) = (q1 - q2, (q1 + q2) / 2)."""
    q1 = np.asarray(q1, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    if q1.shape != q2.shape:
        raise ValueError(f"dimension mismatch: {q1.shape} vs {q2.shape}")
    return q1 - q2, 0.5 * (q1 + q2)


def inverse_plus_minus(q_minus, q_plus):
    """(q_minus, q_plus) -> (q1, q2)."""
    q_minus = np.asarray(q_minus, dtype=float)
    q_plus = np.asarray(q_plus, dtype=float)
    if q_minus.shape != q_plus.shape:
        raise ValueError(f"dimension mismatch: {q_minus.shape} vs {q_plus.shape}")
    return q_plus + 0.5 * q_minus, q_plus - 0.5 * q_minus


def _zero_map(n):
    return lambda q, p, t: np.zeros(n)


@dataclass(frozen=True)
class GalleySystem:
    """Single-copy H plus the physical-limit derivatives of the coupling K.

    ``dK_dqminus(q, p, t)`` is [dK/dq_-]_PL and ``dK_dpminus`` is [dK/dp_-]_PL.
    """

    n: int
    H: ScalarField
    dK_dqminus: Callable[[np.ndarray, np.ndarray, float], np.ndarray]
    dK_dpminus: Callable[[np.ndarray, np.ndarray, float], np.ndarray]
    K: Optional[Callable] = None
    label: str = ""

    @classmethod
    def conservative(cls, n: int, H: ScalarField) -> "GalleySystem":
        return cls(n, H, _zero_map(n), _zero_map(n), label=H.label)

    @classmethod
    def from_full_K(cls, n: int, H: ScalarField, K: Callable, check_antisymmetry: bool = True,
                    label: str = "") -> "GalleySystem":
        """Build from K(q_plus, q_minus, p_plus, p_minus, t).

        The physical-limit derivatives are taken by complex step, so terms of
        K that do not depend on q_minus or p_minus contribute exactly nothing.
        K must therefore accept complex arguments.
        """
        if check_antisymmetry:
            defect = relabel_defect(K, n)
            if defect > 1e-12:
                raise ValueError(f"K is not antisymmetric under q1 <-> q2 relabelling (defect {defect:.3g})")

        def deriv(which):
            def d(q, p, t):
                q = np.asarray(q, dtype=float)
                p = np.asarray(p, dtype=float)
                out = np.empty(n)
                for j in range(n):
                    step = np.zeros(n, dtype=complex)
                    step[j] = 1j * _CSTEP
                    zero = np.zeros(n, dtype=complex)
                    qm, pm = (step, zero) if which == "q" else (zero, step)
                    out[j] = np.imag(K(q.astype(complex), qm, p.astype(complex), pm, t)) / _CSTEP
                return out
            return d

        return cls(n, H, deriv("q"), deriv("p"), K=K, label=label)

    def split(self, state):
        x = as_vector(state)
        if x.size != 2 * self.n:
            raise ValueError(f"dimension mismatch: expected {2 * self.n} coordinates, got {x.size}")
        return x, x[:self.n], x[self.n:]


def relabel_defect(K: Callable, n: int, t: float = 0.0) -> float:
    """max |K(q1, q2, p1, p2) + K(q2, q1, p2, p1)| over probes, evaluated in +/- form.

    Swapping the copies flips q_minus, p_minus and leaves q_plus, p_plus alone.
    """
    worst = 0.0
    for x in probe_points(4 * n):
        qp, qm, pp, pm = x[:n], x[n:2 * n], x[2 * n:3 * n], x[3 * n:]
        worst = max(worst, abs(float(np.real(K(qp, qm, pp, pm, t) + K(qp, -qm, pp, -pm, t)))))
    return worst


def check_K_consistency(sys: GalleySystem, t: float = 0.0, tol: float = 1e-6) -> float:
    """Central-difference PL derivatives of the full K against the stored maps."""
    if sys.K is None:
        raise ValueError("system was not built from a full K")
    n = sys.n
    worst = 0.0
    for x in probe_points(2 * n):
        q, p = x[:n], x[n:]

        def Kq(v, tt):
            return float(np.real(sys.K(q, v, p, np.zeros(n), tt)))

        def Kp(v, tt):
            return float(np.real(sys.K(q, np.zeros(n), p, v, tt)))

        gq = fd_gradient(Kq, np.zeros(n), t)
        gp = fd_gradient(Kp, np.zeros(n), t)
        worst = max(worst, float(np.max(np.abs(gq - sys.dK_dqminus(q, p, t)))),
                    float(np.max(np.abs(gp - sys.dK_dpminus(q, p, t)))))
    if worst > tol:
        raise ValueError(f"stored K derivatives disagree with finite differences ({worst:.3g})")
    return worst


def galley_rhs(sys: GalleySystem, state, t: float = 0.0) -> np.ndarray:
    """q_dot = H_p - [K_{p-}]_PL, p_dot = -H_q + [K_{q-}]_PL."""
    x, q, p = sys.split(state)
    g = sys.H.gradient(x, t)
    n = sys.n
    return np.concatenate([g[n:] - sys.dK_dpminus(q, p, t), -g[:n] + sys.dK_dqminus(q, p, t)])


def galley_energy_rate(sys: GalleySystem, state, t: float = 0.0) -> float:
    """dH/dt along the reduced flow: H_p . [K_{q-}]_PL - H_q . [K_{p-}]_PL."""
    x, q, p = sys.split(state)
    g = sys.H.gradient(x, t)
    n = sys.n
    return float(g[n:] @ sys.dK_dqminus(q, p, t) - g[:n] @ sys.dK_dpminus(q, p, t))


def galley_path(sys: GalleySystem, traj) -> ConfigPath:
    n = sys.n
    states = np.asarray(traj.states)
    times = np.asarray(traj.times)
    qdot = np.array([galley_rhs(sys, s, t)[:n] for s, t in zip(states, times)])
    return ConfigPath(times, states[:, :n], qdot)


def galley_el_residual(L: ScalarField, sys: GalleySystem, path: ConfigPath,
                       dK_dqdotminus: Optional[Callable] = None) -> np.ndarray:
    """Max-norm of d/dt(L_qdot + [K_{qdot-}]_PL) - L_q - [K_{q-}]_PL per interior sample.

    ``L`` is a field over the packed vector (q, q_dot). The K map is evaluated
    at p = dL/dq_dot. ``dK_dqdotminus(q, q_dot, t)`` is optional and zero by
    default.
    """
    dt = _grid_step(path.times)
    n = sys.n
    N = path.times.size
    Lq = np.empty((N, n))
    mom = np.empty((N, n))
    Kq = np.empty((N, n))
    for k in range(N):
        x = np.concatenate([path.q[k], path.qdot[k]])
        g = L.gradient(x, path.times[k])
        Lq[k] = g[:n]
        mom[k] = g[n:]
        Kq[k] = sys.dK_dqminus(path.q[k], mom[k], path.times[k])
        if dK_dqdotminus is not None:
            mom[k] = mom[k] + dK_dqdotminus(path.q[k], path.qdot[k], path.times[k])
    dmom = (mom[2:] - mom[:-2]) / (2 * dt)
    res = dmom - Lq[1:-1] - Kq[1:-1]
    return np.max(np.abs(res), axis=1)
