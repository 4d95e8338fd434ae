"""Independent reference computations shared by the test modules."""

import numpy as np


def expm_taylor(A, terms=30):
    """exp(A) by scaling and squaring with a truncated Taylor series."""
    norm = np.linalg.norm(A, 1)
    k = max(0, int(np.ceil(np.log2(norm))) + 4) if norm > 0 else 0
    B = A / 2 ** k
    E = np.eye(A.shape[0])
    term = np.eye(A.shape[0])
    for j in range(1, terms):
        term = term @ B / j
        E = E + term
    for _ in range(k):
        E = E @ E
    return E


def harmonic(v, t):
    return np.array([v[1], -v[0]])


def rk4_newton(accel, x0, v0, t0, t1, dt):
    """Textbook RK4 for x'' = accel(x, v, t), written out independently of the package."""
    m = int(round((t1 - t0) / dt))
    x, v = float(x0), float(v0)
    xs = [x]
    t = t0
    for _ in range(m):
        k1x, k1v = v, accel(x, v, t)
        k2x, k2v = v + 0.5 * dt * k1v, accel(x + 0.5 * dt * k1x, v + 0.5 * dt * k1v, t + 0.5 * dt)
        k3x, k3v = v + 0.5 * dt * k2v, accel(x + 0.5 * dt * k2x, v + 0.5 * dt * k2v, t + 0.5 * dt)
        k4x, k4v = v + dt * k3v, accel(x + dt * k3x, v + dt * k3v, t + dt)
        x += dt / 6 * (k1x + 2 * k2x + 2 * k3x + k4x)
        v += dt / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
        t += dt
        xs.append(x)
    return np.array(xs)
