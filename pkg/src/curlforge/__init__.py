"""Curl forces coupled to dissipative and gyroscopic forces: simulation and verification."""

__version__ = "0.1.0"

from .core import (EvaluationDomainError, ForceField2D, PhaseState, ScalarField, curl2d, fd_gradient,
                   fd_jacobian, probe_points)
from .integrate import BlowUpError, Trajectory, integrate, rk4_step
from .catalog import build_system, list_catalog

__all__ = [
    "BlowUpError", "EvaluationDomainError", "ForceField2D", "PhaseState", "ScalarField", "Trajectory",
    "build_system", "curl2d", "fd_gradient", "fd_jacobian", "integrate", "list_catalog", "probe_points",
    "rk4_step",
]
