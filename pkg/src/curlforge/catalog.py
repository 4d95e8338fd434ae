"""Named curl-force systems built from the bracket, contact and Galley modules.

Momentum/velocity conventions follow the anisotropic kinetic term
1/2 (p_x^2 - p_y^2): x_dot = p_x and y_dot = -p_y, unless dissipation
enters the position legs (``bateman_metriplectic``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .brackets import (GyroMetriplecticCoefficients, HeisenbergStructure, MetriplecticStructure,
                       bivector_rhs, canonical_bivector, double_bracket, gyro_bracket_rhs,
                       gyro_metriplectic_matrix, gyro_metriplectic_rhs, heisenberg_bivector,
                       metriplectic_rhs)
from .contact import ContactSystem, HerglotzLagrangian, contact_energy_rate, contact_vector_field
from .core import ForceField2D, ScalarField, as_vector
from .galley import GalleySystem, galley_energy_rate, galley_rhs

FORMULATIONS = ("hamiltonian", "metriplectic", "gyro", "gyro_metriplectic", "contact", "galley", "newton")


@dataclass(frozen=True)
class Potential:
    """U(xi) with its first two derivatives."""

    name: str
    u: Callable[[float], float]
    du: Callable[[float], float]
    d2u: Callable[[float], float]

    @classmethod
    def from_callable(cls, u: Callable[[float], float], name: str = "custom", h: float = 1e-4) -> "Potential":
        # Derivatives by central differences; pass a full Potential for analytic ones.
        def du(x):
            return (u(x + h) - u(x - h)) / (2 * h)

        def d2u(x):
            return (u(x + h) - 2 * u(x) + u(x - h)) / (h * h)

        return cls(name, u, du, d2u)


LINEAR = Potential("linear", lambda x: x, lambda x: 1.0, lambda x: 0.0)
QUADRATIC = Potential("quadratic", lambda x: 0.5 * x * x, lambda x: x, lambda x: 1.0)
SINE = Potential("sine", np.sin, np.cos, lambda x: -np.sin(x))
POTENTIALS = {p.name: p for p in (LINEAR, QUADRATIC, SINE)}

ParamValue = Union[float, Callable[[float], float]]


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    formulation: str
    schema: dict
    reference: str
    takes_potential: bool = False
    n: int = 2
    has_z: bool = False
    linear: bool = False

    @property
    def dim(self) -> int:
        return 2 * self.n + (1 if self.has_z else 0)

    @property
    def coordinates(self) -> tuple:
        names = ("x", "y")[:self.n] + ("p_x", "p_y")[:self.n]
        return names + (("z",) if self.has_z else ())


@dataclass
class SystemDefinition:
    name: str
    formulation: str
    dim: int
    n: int
    rhs: Callable[[np.ndarray, float], np.ndarray]
    params: dict
    observables: dict
    coordinates: tuple
    potential: Optional[Potential] = None
    force: Optional[ForceField2D] = None
    structure: object = None
    energy_rate: Optional[Callable[[np.ndarray, float], float]] = None
    conserved: tuple = ()
    nonconserved: tuple = ()
    pure_curl: bool = False
    default_x0: tuple = ()
    extras: dict = field(default_factory=dict)

    def velocity(self, state, t: float = 0.0) -> np.ndarray:
        return np.asarray(self.rhs(as_vector(state), t))[:self.n]

    def state_from_config(self, q, v, z: float = 0.0, t: float = 0.0) -> np.ndarray:
        """Initial state with configuration q and velocity v.

        Every entry has q_dot affine in p, so unit-step differences recover
        the map exactly and it is inverted directly.
        """
        n = self.n
        q = np.asarray(q, dtype=float)
        v = np.asarray(v, dtype=float)
        if q.size != n or v.size != n:
            raise ValueError(f"{self.name} has a {n}-dim configuration space")
        tail = [z] if self.dim == 2 * n + 1 else []

        def qdot(p):
            return self.velocity(np.concatenate([q, p, tail]), t)

        offset = qdot(np.zeros(n))
        e = np.eye(n)
        A = np.column_stack([(qdot(e[j]) - qdot(-e[j])) / 2.0 for j in range(n)])
        p = np.linalg.solve(A, v - offset)
        return np.concatenate([q, p, tail])


def _fn(value: ParamValue) -> Callable[[float], float]:
    if callable(value):
        return value
    v = float(value)
    return lambda t: v


ENTRIES = {
    e.name: e for e in [
        CatalogEntry("radial_curl", "hamiltonian", {},
                     "radial curl force, U(1/2(x^2 - y^2)): x'' = -x U', y'' = -y U'",
                     takes_potential=True),
        CatalogEntry("azimuthal_curl", "hamiltonian", {},
                     "azimuthal curl force, U(xy): x'' = -y U'(xy), y'' = x U'(xy)",
                     takes_potential=True),
        CatalogEntry("kapitsa", "hamiltonian", {"a": 1.0, "b": 1.0},
                     "Kapitsa rotating shaft: x'' + a y + b x = 0, y'' - a x + b y = 0",
                     linear=True),
        CatalogEntry("rotating_saddle", "newton", {"omega": 1.0},
                     "rotating saddle U = 1/2(x^2 - y^2) cos 2wt - xy sin 2wt, r'' = -grad U"),
        CatalogEntry("bateman_metriplectic", "metriplectic", {"gamma": 0.2},
                     "Heisenberg double-bracket dissipation, S = -(gamma/2)|q|^2: dissipative radial curl forces",
                     takes_potential=True),
        CatalogEntry("conformal_curl", "metriplectic", {"gamma": 0.2},
                     "conformal curl force system, S = -(gamma/2)|p|^2: p' = -gamma p - dH/dq",
                     takes_potential=True),
        CatalogEntry("gyro_curl", "gyro", {"s": 0.5},
                     "radial curl force with magnetic extension: p' = -dH/dq - s dH/dp",
                     takes_potential=True),
        CatalogEntry("gyro_dissipative_km", "gyro_metriplectic", {"a": 1.0, "b": 1.0, "s": 0.5, "c": 0.1},
                     "Kapitsa model with gyroscopic s and symmetric c: x'' + s y' - c x' + b x + a y = 0",
                     linear=True),
        CatalogEntry("contact_radial", "contact", {"gamma": 0.2},
                     "contact Hamiltonian 1/2(p_x^2 - p_y^2) + U(1/2(x^2 - y^2)) + gamma z",
                     takes_potential=True, has_z=True),
        CatalogEntry("contact_km", "contact", {"a": 1.0, "b": 1.0, "gamma": 0.2},
                     "contact Kapitsa: 1/2(p_x^2 - p_y^2) + b/2(x^2 - y^2) + a xy + gamma z",
                     has_z=True),
        CatalogEntry("galley_bateman", "galley", {"kappa": 0.2},
                     "Galley decoupling of the Bateman pair, H = 1/2 p^2 + 1/2 x^2, K = kappa p+ x-: x'' - kappa x' + x = 0",
                     n=1),
        CatalogEntry("galley_forced_km", "galley", {"a": 1.0, "b": 1.0, "kappa": 0.2, "f_x": 0.0, "f_y": 0.0},
                     "forced damped linear curl system, K = -kappa p+ . q- + f . q-",
                     linear=True),
    ]
}

DEFAULT_X0 = {
    2: (0.5, 0.3, 0.2, -0.1),
    1: (1.0, 0.0),
}


def list_catalog() -> list:
    return [ENTRIES[k] for k in sorted(ENTRIES)]


def _validate(entry: CatalogEntry, params: Optional[dict], strict: bool) -> dict:
    params = dict(params or {})
    extra = sorted(set(params) - set(entry.schema))
    if extra:
        raise ValueError(f"{entry.name}: unknown parameter(s) {', '.join(extra)}; "
                         f"expected {sorted(entry.schema) or 'none'}")
    missing = sorted(set(entry.schema) - set(params))
    if strict and missing:
        raise ValueError(f"{entry.name}: missing parameter(s) {', '.join(missing)}")
    out = dict(entry.schema)
    for k, v in params.items():
        if not callable(v):
            v = float(v)
            if not np.isfinite(v):
                raise ValueError(f"{entry.name}: parameter {k} must be finite")
        out[k] = v
    return out


def _resolve_potential(entry: CatalogEntry, potential) -> Optional[Potential]:
    if not entry.takes_potential:
        if potential is not None:
            raise ValueError(f"{entry.name} does not take a potential")
        return None
    if potential is None:
        return QUADRATIC
    if isinstance(potential, Potential):
        return potential
    if isinstance(potential, str):
        try:
            return POTENTIALS[potential]
        except KeyError:
            raise ValueError(f"unknown potential {potential!r}; choose from {sorted(POTENTIALS)}") from None
    if callable(potential):
        return Potential.from_callable(potential)
    raise ValueError(f"cannot interpret potential {potential!r}")


# Hamiltonians over (x, y, p_x, p_y[, ...]); extra trailing coordinates are ignored.

def radial_hamiltonian(U: Potential) -> ScalarField:
    def H(v, t):
        x, y, px, py = v[:4]
        return 0.5 * (px * px - py * py) + U.u(0.5 * (x * x - y * y))

    def dH(v, t):
        x, y, px, py = v[:4]
        d = U.du(0.5 * (x * x - y * y))
        return np.concatenate([[x * d, -y * d, px, -py], np.zeros(len(v) - 4)])

    return ScalarField(H, dH, label=f"H_radial[{U.name}]")


def azimuthal_hamiltonian(U: Potential) -> ScalarField:
    def H(v, t):
        x, y, px, py = v[:4]
        return 0.5 * (px * px - py * py) + U.u(x * y)

    def dH(v, t):
        x, y, px, py = v[:4]
        d = U.du(x * y)
        return np.concatenate([[y * d, x * d, px, -py], np.zeros(len(v) - 4)])

    return ScalarField(H, dH, label=f"H_azimuthal[{U.name}]")


def kapitsa_hamiltonian(a: float, b: float) -> ScalarField:
    def H(v, t):
        x, y, px, py = v[:4]
        return 0.5 * (px * px - py * py) + 0.5 * b * (x * x - y * y) + a * x * y

    def dH(v, t):
        x, y, px, py = v[:4]
        return np.concatenate([[b * x + a * y, -b * y + a * x, px, -py], np.zeros(len(v) - 4)])

    return ScalarField(H, dH, label=f"H_kapitsa(a={a}, b={b})")


def with_z_term(H: ScalarField, gamma: Callable[[float], float]) -> ScalarField:
    """H(q, p) + gamma(t) z over (q, p, z)."""
    def Hc(v, t):
        return H.fn(v, t) + gamma(t) * v[-1]

    def dHc(v, t):
        g = np.array(H.grad_fn(v, t), dtype=float)
        g[-1] = gamma(t)
        return g

    return ScalarField(Hc, dHc, label=f"{H.label} + gamma z")


def angular_momentum_field(sys_rhs: Callable, n: int) -> ScalarField:
    def L(v, t):
        qd = np.asarray(sys_rhs(v, t))[:n]
        return v[0] * qd[1] - v[1] * qd[0]

    return ScalarField(L, label="angular_momentum")


def _hamiltonian_force(H: ScalarField) -> ForceField2D:
    """Newtonian acceleration (x'', y'') = (p_x', -p_y') for position-only H-forces."""
    def F(x, y, t):
        g = H.grad_fn(np.array([x, y, 0.0, 0.0]), t)
        return (-g[0], g[1])

    return ForceField2D(F, label=H.label)


def build_system(name: str, params: Optional[dict] = None, potential=None, strict: bool = False) -> SystemDefinition:
    """Assemble a catalog system; omitted parameters take their documented defaults."""
    try:
        entry = ENTRIES[name]
    except KeyError:
        raise ValueError(f"unknown system {name!r}; known: {', '.join(sorted(ENTRIES))}") from None
    P = _validate(entry, params, strict)
    U = _resolve_potential(entry, potential)
    builder = _BUILDERS[name]
    sys = builder(entry, P, U)
    sys.default_x0 = DEFAULT_X0[entry.n] + ((0.0,) if entry.has_z else ())
    return sys


def _base(entry, P, U, rhs, observables, **kw) -> SystemDefinition:
    obs = dict(observables)
    if entry.n == 2:
        obs.setdefault("angular_momentum", angular_momentum_field(rhs, 2))
    return SystemDefinition(entry.name, entry.formulation, entry.dim, entry.n, rhs, P, obs,
                            entry.coordinates, potential=U, **kw)


def _radial(entry, P, U):
    H = radial_hamiltonian(U)
    lam = canonical_bivector(2)
    return _base(entry, P, U, lambda v, t: bivector_rhs(lam, H, v, t), {"energy": H},
                 force=_hamiltonian_force(H), structure=lam,
                 conserved=("energy", "angular_momentum"), pure_curl=True)


def _azimuthal(entry, P, U):
    H = azimuthal_hamiltonian(U)
    lam = canonical_bivector(2)
    return _base(entry, P, U, lambda v, t: bivector_rhs(lam, H, v, t), {"energy": H},
                 force=_hamiltonian_force(H), structure=lam,
                 conserved=("energy",), nonconserved=("angular_momentum",), pure_curl=True)


def _kapitsa(entry, P, U):
    H = kapitsa_hamiltonian(P["a"], P["b"])
    lam = canonical_bivector(2)
    return _base(entry, P, U, lambda v, t: bivector_rhs(lam, H, v, t), {"energy": H},
                 force=_hamiltonian_force(H), structure=lam,
                 conserved=("energy",), nonconserved=("angular_momentum",), pure_curl=True)


def _rotating_saddle(entry, P, U):
    w = P["omega"]

    def grad_u(x, y, t):
        c, s = np.cos(2 * w * t), np.sin(2 * w * t)
        return np.array([x * c - y * s, -y * c - x * s])

    def energy(v, t):
        x, y, vx, vy = v
        return 0.5 * (vx * vx + vy * vy) + 0.5 * (x * x - y * y) * np.cos(2 * w * t) - x * y * np.sin(2 * w * t)

    def rhs(v, t):
        g = grad_u(v[0], v[1], t)
        return np.array([v[2], v[3], -g[0], -g[1]])

    force = ForceField2D(lambda x, y, t: tuple(-grad_u(x, y, t)), label="rotating_saddle")
    return _base(entry, P, U, rhs, {"energy": ScalarField(energy, label="E_rotating_saddle")},
                 force=force, nonconserved=("energy", "angular_momentum"))


def _heisenberg_bateman(P, U, entropy_block: str):
    """Metriplectic structure on the Heisenberg dual, evaluated at mu = 1."""
    gamma = _fn(P["gamma"])
    H = radial_hamiltonian(U)
    idx = slice(0, 2) if entropy_block == "q" else slice(2, 4)

    def S(v, t):
        return -0.5 * gamma(t) * float(v[idx] @ v[idx])

    def dS(v, t):
        g = np.zeros(len(v))
        g[idx] = -gamma(t) * v[idx]
        return g

    lam = heisenberg_bivector(HeisenbergStructure(2))
    return MetriplecticStructure(lam, H, ScalarField(S, dS, label=f"S_{entropy_block}"), a=1.0)


def _metriplectic(entry, P, U):
    m = _heisenberg_bateman(P, U, "q" if entry.name == "bateman_metriplectic" else "p")

    def rhs(v, t):
        return metriplectic_rhs(m, np.append(v, 1.0), t)[:4]

    def rate(v, t):
        return m.a * double_bracket(m, m.hamiltonian, m.entropy, np.append(v, 1.0), t)

    return _base(entry, P, U, rhs, {"energy": m.hamiltonian}, structure=m, energy_rate=rate,
                 nonconserved=("energy",))


def _gyro_curl(entry, P, U):
    H = radial_hamiltonian(U)
    coeff = GyroMetriplecticCoefficients(s=P["s"], c=0.0)
    return _base(entry, P, U, lambda v, t: gyro_bracket_rhs(H, coeff, v, t), {"energy": H},
                 structure=coeff, conserved=("energy",))


def _gyro_km(entry, P, U):
    H = kapitsa_hamiltonian(P["a"], P["b"])
    coeff = GyroMetriplecticCoefficients(s=P["s"], c=P["c"])
    M = gyro_metriplectic_matrix(coeff)

    def rate(v, t):
        g = H.grad_fn(v, t)
        return float(g @ M @ g)

    return _base(entry, P, U, lambda v, t: gyro_metriplectic_rhs(H, coeff, v, t), {"energy": H},
                 structure=coeff, energy_rate=rate,
                 conserved=("energy",) if P["c"] == 0 else (), nonconserved=() if P["c"] == 0 else ("energy",))


def _contact(entry, P, U):
    gamma = _fn(P["gamma"])
    base = radial_hamiltonian(U) if entry.name == "contact_radial" else kapitsa_hamiltonian(P["a"], P["b"])
    csys = ContactSystem(2, with_z_term(base, gamma))
    if entry.name == "contact_radial":
        def L(q, qd, z, t):
            return 0.5 * (qd[0] ** 2 - qd[1] ** 2) - U.u(0.5 * (q[0] ** 2 - q[1] ** 2)) - gamma(t) * z
    else:
        a, b = P["a"], P["b"]

        def L(q, qd, z, t):
            return (0.5 * (qd[0] ** 2 - qd[1] ** 2) - 0.5 * b * (q[0] ** 2 - q[1] ** 2)
                    - a * q[0] * q[1] - gamma(t) * z)

    lag = HerglotzLagrangian(2, L, velocity_hessian=np.diag([1.0, -1.0]), label=f"L_{entry.name}")
    return _base(entry, P, U, lambda v, t: contact_vector_field(csys, v, t), {"energy": csys.H},
                 structure=csys, energy_rate=lambda v, t: contact_energy_rate(csys, v, t),
                 nonconserved=("energy",), extras={"lagrangian": lag})


def galley_bateman_system(kappa: ParamValue) -> GalleySystem:
    k = _fn(kappa)
    H = ScalarField(lambda v, t: 0.5 * v[1] ** 2 + 0.5 * v[0] ** 2,
                    lambda v, t: np.array([v[0], v[1]]), label="H_1")

    def K(qp, qm, pp, pm, t):
        return k(t) * pp[0] * qm[0]

    return GalleySystem.from_full_K(1, H, K, label="galley_bateman")


def galley_forced_km_system(a, b, kappa: ParamValue, f_x: ParamValue, f_y: ParamValue,
                            extra_term: Optional[Callable] = None) -> GalleySystem:
    k, fx, fy = _fn(kappa), _fn(f_x), _fn(f_y)
    H = kapitsa_hamiltonian(a, b)

    def K(qp, qm, pp, pm, t):
        f = np.array([fx(t), fy(t)])
        val = -k(t) * (pp @ qm) + f @ qm
        if extra_term is not None:
            val = val + extra_term(qp, qm, pp, pm, t)
        return val

    return GalleySystem.from_full_K(2, H, K, check_antisymmetry=extra_term is None, label="galley_forced_km")


def _galley(entry, P, U):
    if entry.name == "galley_bateman":
        g = galley_bateman_system(P["kappa"])
    else:
        g = galley_forced_km_system(P["a"], P["b"], P["kappa"], P["f_x"], P["f_y"])
    return _base(entry, P, U, lambda v, t: galley_rhs(g, v, t), {"energy": g.H}, structure=g,
                 energy_rate=lambda v, t: galley_energy_rate(g, v, t), nonconserved=("energy",))


_BUILDERS = {
    "radial_curl": _radial,
    "azimuthal_curl": _azimuthal,
    "kapitsa": _kapitsa,
    "rotating_saddle": _rotating_saddle,
    "bateman_metriplectic": _metriplectic,
    "conformal_curl": _metriplectic,
    "gyro_curl": _gyro_curl,
    "gyro_dissipative_km": _gyro_km,
    "contact_radial": _contact,
    "contact_km": _contact,
    "galley_bateman": _galley,
    "galley_forced_km": _galley,
}


def linear_matrix(name: str, params: Optional[dict] = None) -> np.ndarray:
    """Constant first-order matrix of a linear catalog system in (x, y, p_x, p_y)."""
    entry = ENTRIES.get(name)
    if entry is None or not entry.linear:
        raise ValueError(f"{name!r} is not in the linear family (kapitsa, gyro_dissipative_km, galley_forced_km)")
    P = _validate(entry, params, strict=False)
    a, b = P["a"], P["b"]
    hess = np.array([[b, a, 0, 0], [a, -b, 0, 0], [0, 0, 1, 0], [0, 0, 0, -1]], dtype=float)
    if name == "kapitsa":
        return canonical_bivector(2)(np.zeros(4)) @ hess
    if name == "gyro_dissipative_km":
        return gyro_metriplectic_matrix(GyroMetriplecticCoefficients(P["s"], P["c"])) @ hess
    if callable(P["f_x"]) or callable(P["f_y"]) or P["f_x"] != 0 or P["f_y"] != 0:
        raise ValueError("galley_forced_km is linear-homogeneous only with f = 0")
    if callable(P["kappa"]):
        raise ValueError("galley_forced_km needs a constant kappa for linear analysis")
    M = canonical_bivector(2)(np.zeros(4)) @ hess
    M[2:, 2:] -= P["kappa"] * np.eye(2)
    return M
