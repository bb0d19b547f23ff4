"""P1 triangle phase-field discretization with a vector damage field."""

from .energy import evaluate, total_energy
from .mesh import Mesh, read_mesh, rectangle_mesh, square_with_hole_mesh, write_mesh
from .solvers import affine_predictor, apply_irreversibility, solve_damage, solve_displacement, staggered_step
from .state import BoundaryCondition, PhaseFieldParams, SimulationState, load_checkpoint, save_checkpoint

__all__ = [
    "evaluate",
    "total_energy",
    "Mesh",
    "read_mesh",
    "rectangle_mesh",
    "square_with_hole_mesh",
    "write_mesh",
    "affine_predictor",
    "apply_irreversibility",
    "solve_damage",
    "solve_displacement",
    "staggered_step",
    "BoundaryCondition",
    "PhaseFieldParams",
    "SimulationState",
    "load_checkpoint",
    "save_checkpoint",
]
