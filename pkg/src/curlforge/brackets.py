"""Poisson bivectors, double brackets and metriplectic / gyroscopic flows.

Coordinates are ordered (q_1..q_n, p_1..p_n) for canonical structures and
(mu^1..mu^n, mu_1..mu_n, mu) for the Heisenberg realization, so that at
mu = 1 the first 2n coordinates are the canonical ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import ScalarField, as_vector, fd_jacobian


@dataclass(frozen=True)
class BivectorField:
    dim: int
    entries: Callable[[np.ndarray], np.ndarray]
    label: str = ""
    constant: bool = False

    def __call__(self, z) -> np.ndarray:
        z = as_vector(z)
        _check_dim(z, self.dim)
        return np.asarray(self.entries(z), dtype=float)

    def skew_defect(self, z) -> float:
        lam = self(z)
        return float(np.max(np.abs(lam + lam.T)))


def _check_dim(z: np.ndarray, dim: int):
    if z.size != dim:
        raise ValueError(f"dimension mismatch: state has {z.size} coordinates, structure expects {dim}")


def _grad(F: ScalarField, z: np.ndarray, t: float) -> np.ndarray:
    g = F.gradient(z, t)
    if g.size != z.size:
        raise ValueError(f"dimension mismatch: gradient of {F.label!r} has {g.size} entries, state has {z.size}")
    return g


def bivector_bracket(lam: BivectorField, F: ScalarField, H: ScalarField, z, t: float = 0.0) -> float:
    """{F, H}(z) = dF . Lambda(z) . dH."""
    z = as_vector(z)
    return float(_grad(F, z, t) @ lam(z) @ _grad(H, z, t))


def bivector_rhs(lam: BivectorField, H: ScalarField, z, t: float = 0.0) -> np.ndarray:
    """Hamiltonian vector field z_dot = Lambda(z) grad H."""
    z = as_vector(z)
    return lam(z) @ _grad(H, z, t)


def canonical_matrix(n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be >= 1")
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def canonical_bivector(n: int) -> BivectorField:
    J = canonical_matrix(n)
    J.setflags(write=False)
    return BivectorField(2 * n, lambda z: J, label=f"canonical(n={n})", constant=True)


@dataclass(frozen=True)
class HeisenbergStructure:
    """Heisenberg algebra of dimension 2n+1; only [e^i, e_j] = delta^i_j f is nonzero."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")

    @property
    def dim(self) -> int:
        return 2 * self.n + 1

    def structure_constant(self, i: int, j: int, k: int) -> float:
        """C_ij^k in the basis (e^1..e^n, e_1..e_n, f)."""
        n = self.n
        if k != 2 * n:
            return 0.0
        if i < n and j == i + n:
            return 1.0
        if j < n and i == j + n:
            return -1.0
        return 0.0


def heisenberg_bivector(h: HeisenbergStructure) -> BivectorField:
    """Lie-Poisson bivector Lambda_ij = C_ij^k mu_k on the Heisenberg dual."""
    n = h.n
    J = canonical_matrix(n)

    def entries(z):
        lam = np.zeros((2 * n + 1, 2 * n + 1))
        lam[:2 * n, :2 * n] = z[2 * n] * J
        return lam

    return BivectorField(2 * n + 1, entries, label=f"heisenberg(n={n})")


def gyro_matrix(s, n: int = 2) -> np.ndarray:
    """Canonical bivector with the magnetic momentum-momentum block -s_ij.

    A scalar ``s`` in two dimensions means s_12 = s, s_21 = -s.
    """
    S = _skew_coefficients(s, n)
    lam = canonical_matrix(n)
    lam[n:, n:] = -S
    return lam


def gyro_bivector(s, n: int = 2) -> BivectorField:
    lam = gyro_matrix(s, n)
    lam.setflags(write=False)
    return BivectorField(2 * n, lambda z: lam, label=f"gyro(s={s})", constant=True)


def _skew_coefficients(s, n: int) -> np.ndarray:
    if np.ndim(s) == 0:
        if n != 2:
            raise ValueError("scalar s is only meaningful for n = 2")
        return np.array([[0.0, float(s)], [-float(s), 0.0]])
    S = np.asarray(s, dtype=float)
    if S.shape != (n, n) or not np.allclose(S, -S.T, atol=1e-12, rtol=0):
        raise ValueError("s must be a skew-symmetric n x n matrix")
    return S


@dataclass(frozen=True)
class MetriplecticStructure:
    """Poisson bivector plus the double-bracket metric G = Lambda Lambda^T."""

    lam: BivectorField
    hamiltonian: ScalarField
    entropy: ScalarField
    a: float = 1.0

    def g(self, z) -> np.ndarray:
        L = self.lam(z)
        return L @ L.T


def double_bracket(m: MetriplecticStructure, F: ScalarField, S: ScalarField, z, t: float = 0.0) -> float:
    """(F, S)^(D) = dF . G(z) . dS."""
    z = as_vector(z)
    return float(_grad(F, z, t) @ m.g(z) @ _grad(S, z, t))


def metriplectic_rhs(m: MetriplecticStructure, z, t: float = 0.0) -> np.ndarray:
    """z_dot = Lambda grad H + a G grad S."""
    z = as_vector(z)
    L = m.lam(z)
    return L @ _grad(m.hamiltonian, z, t) + m.a * ((L @ L.T) @ _grad(m.entropy, z, t))


@dataclass(frozen=True)
class GyroMetriplecticCoefficients:
    s: float = 0.0
    c: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.s) and np.isfinite(self.c)):
            raise ValueError("s and c must be finite")

    def skew(self) -> np.ndarray:
        return _skew_coefficients(self.s, 2)

    def symmetric(self) -> np.ndarray:
        return self.c * np.eye(2)


def gyro_metriplectic_matrix(coeff: GyroMetriplecticCoefficients) -> np.ndarray:
    """Generator M with z_dot = M grad H: gyroscopic bivector plus c on the momentum block."""
    M = gyro_matrix(coeff.s, 2)
    M[2:, 2:] += coeff.symmetric()
    return M


def _require_planar(z: np.ndarray):
    if z.size != 4:
        raise ValueError(f"wrong dimension: gyroscopic brackets need a 4-dim planar phase space, got {z.size}")


def gyro_bracket_rhs(H: ScalarField, coeff: GyroMetriplecticCoefficients, state, t: float = 0.0) -> np.ndarray:
    """q_dot = dH/dp, p_dot = -dH/dq - s dH/dp."""
    if coeff.c != 0:
        raise ValueError("gyro_bracket_rhs takes c = 0; use gyro_metriplectic_rhs for dissipation")
    z = as_vector(state)
    _require_planar(z)
    return gyro_matrix(coeff.s, 2) @ _grad(H, z, t)


def gyro_metriplectic_rhs(H: ScalarField, coeff: GyroMetriplecticCoefficients, state, t: float = 0.0) -> np.ndarray:
    z = as_vector(state)
    _require_planar(z)
    return gyro_metriplectic_matrix(coeff) @ _grad(H, z, t)


def jacobi_defect(lam: BivectorField, z, h: float | None = None) -> float:
    """Max |cyclic sum| of Lambda_li d_l Lambda_jk over all index triples.

    This is the coordinate form of the Schouten self-bracket; it vanishes
    identically for a Poisson bivector.
    """
    z = as_vector(z)
    d = lam.dim
    _check_dim(z, d)
    L = lam(z)
    dL = fd_jacobian(lambda x, t: lam(x).ravel(), z, 0.0, h).reshape(d, d, d)
    # dL[j, k, l] = d Lambda_jk / d z_l
    cyc = (np.einsum("li,jkl->ijk", L, dL)
           + np.einsum("lj,kil->ijk", L, dL)
           + np.einsum("lk,ijl->ijk", L, dL))
    return float(np.max(np.abs(cyc)))
