"""Intact energies, the effective crack energy Wd, stresses and tractions."""

from .materials import Family, MaterialModel, fd_stress, intact_energy, intact_stress
from .relaxation import (
    Branch,
    CrackTraction,
    RelaxationResult,
    a22_star,
    a33_star,
    compatibility_defect,
    crack_traction,
    effective_energy,
    effective_energy_generic,
    effective_stress,
    landscape_theta,
    local_minima,
)

__all__ = [
    "Family",
    "MaterialModel",
    "fd_stress",
    "intact_energy",
    "intact_stress",
    "Branch",
    "CrackTraction",
    "RelaxationResult",
    "a22_star",
    "a33_star",
    "compatibility_defect",
    "crack_traction",
    "effective_energy",
    "effective_energy_generic",
    "effective_stress",
    "landscape_theta",
    "local_minima",
]
