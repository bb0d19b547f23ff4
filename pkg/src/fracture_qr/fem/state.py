"""Simulation state, phase-field parameters, boundary conditions, checkpoints."""

from __future__ import annotations

import io
import json
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .mesh import Mesh

__all__ = [
    "PhaseFieldParams",
    "SimulationState",
    "BoundaryCondition",
    "dirichlet_values",
    "check_resolution",
    "save_checkpoint",
    "load_checkpoint",
    "CHECKPOINT_MAGIC",
    "CHECKPOINT_VERSION",
]


@dataclass(frozen=True)
class PhaseFieldParams:
    """Regularization and staggering controls (nondimensional)."""

    epsilon: float = 0.015
    eta: float = 1e-6
    d_c: float = 0.95
    stagger_tol: float = 1e-3
    max_stagger: int = 100
    guard_tol: float = 1e-8

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not 0.0 < self.eta < 1e-2:
            raise ValueError("eta must lie in (0, 1e-2)")
        if not 0.0 < self.d_c < 1.0:
            raise ValueError("d_c must lie in (0, 1)")
        if not self.stagger_tol > 0:
            raise ValueError("stagger_tol must be positive")
        if self.max_stagger < 1:
            raise ValueError("max_stagger must be at least 1")


@dataclass
class SimulationState:
    """Nodal fields on a mesh.

    ``y`` is the deformed position (N, 2); ``d`` the damage vector (N, 2).
    Frozen nodes keep ``d == frozen_dir`` exactly.  ``d_lower`` holds
    optional componentwise lower bounds on d (``-inf`` where unused).
    """

    mesh: Mesh
    y: np.ndarray
    d: np.ndarray
    frozen: np.ndarray
    frozen_dir: np.ndarray
    d_lower: np.ndarray
    step: int = 0

    @classmethod
    def initial(cls, mesh: Mesh) -> "SimulationState":
        n = mesh.n_nodes
        return cls(mesh, mesh.nodes.copy(), np.zeros((n, 2)), np.zeros(n, dtype=bool),
                   np.zeros((n, 2)), np.full((n, 2), -np.inf), 0)

    def copy(self) -> "SimulationState":
        return replace(self, y=self.y.copy(), d=self.d.copy(), frozen=self.frozen.copy(),
                       frozen_dir=self.frozen_dir.copy(), d_lower=self.d_lower.copy())

    def freeze(self, nodes, direction) -> None:
        """Seed fully damaged, frozen nodes with a fixed unit direction."""
        nodes = np.asarray(nodes, dtype=np.int64)
        direction = np.broadcast_to(np.asarray(direction, dtype=float), (len(nodes), 2))
        unit = direction / np.linalg.norm(direction, axis=1)[:, None]
        self.frozen[nodes] = True
        self.frozen_dir[nodes] = unit
        self.d[nodes] = unit

    def check_invariants(self, tol: float = 1e-10) -> None:
        mags = np.linalg.norm(self.d, axis=1)
        if np.any(mags > 1.0 + tol):
            raise AssertionError(f"|d| exceeds 1 (max {mags.max():.3e})")
        if np.any(self.d[self.frozen] != self.frozen_dir[self.frozen]):
            raise AssertionError("frozen nodes were modified")


@dataclass(frozen=True)
class BoundaryCondition:
    """Boundary condition on a tagged part of the boundary.

    ``kind`` is ``"affine"`` (y = F0 x on masked components), ``"zero"``
    (y = x) or ``"free"`` (traction free).
    """

    tag: str
    kind: str
    F0: np.ndarray = field(default_factory=lambda: np.eye(2))
    mask: tuple[bool, bool] = (True, True)

    def __post_init__(self):
        if self.kind not in ("affine", "zero", "free"):
            raise ValueError(f"unknown boundary condition kind {self.kind!r}")
        object.__setattr__(self, "F0", np.asarray(self.F0, dtype=float).reshape(2, 2))


def dirichlet_values(mesh: Mesh, bcs) -> tuple[np.ndarray, np.ndarray]:
    """Boolean mask (N, 2) of constrained components and their values."""
    fixed = np.zeros((mesh.n_nodes, 2), dtype=bool)
    vals = np.zeros((mesh.n_nodes, 2))
    for bc in bcs:
        if bc.tag not in mesh.tags:
            raise KeyError(f"boundary tag {bc.tag!r} not in mesh")
        if bc.kind == "free":
            continue
        nodes = mesh.boundary_nodes(bc.tag)
        X = mesh.nodes[nodes]
        target = X if bc.kind == "zero" else X @ bc.F0.T
        mask = (True, True) if bc.kind == "zero" else bc.mask
        for c in range(2):
            if mask[c]:
                fixed[nodes, c] = True
                vals[nodes, c] = target[:, c]
    return fixed, vals


def check_resolution(mesh: Mesh, params: PhaseFieldParams, region=None) -> bool:
    """Warn when elements in ``region`` (element mask) exceed epsilon / 2."""
    h = mesh.element_size()
    if region is not None:
        h = h[region]
    ok = bool(np.all(h <= 0.5 * params.epsilon + 1e-12))
    if not ok:
        warnings.warn(f"mesh size {h.max():.4g} exceeds epsilon/2 = {0.5 * params.epsilon:.4g}; "
                      "the regularized crack is under-resolved", stacklevel=2)
    return ok


# ---------------------------------------------------------------------------
# Checkpoints
# ---------------------------------------------------------------------------
# Layout: 8-byte magic, 1 version byte, then an uncompressed NumPy .npz
# archive holding nodes, triangles, boundary edges, tags (JSON), y, d,
# frozen, frozen_dir, d_lower and step.

CHECKPOINT_MAGIC = b"FQRSTATE"
CHECKPOINT_VERSION = 1


def save_checkpoint(state: SimulationState, path) -> None:
    buf = io.BytesIO()
    m = state.mesh
    np.savez(buf, nodes=m.nodes, triangles=m.triangles, boundary_edges=m.boundary_edges,
             boundary_tags=np.frombuffer(json.dumps(list(m.boundary_tags)).encode(), dtype=np.uint8),
             y=state.y, d=state.d, frozen=state.frozen, frozen_dir=state.frozen_dir,
             d_lower=state.d_lower, step=np.array(state.step))
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(bytes([CHECKPOINT_VERSION]))
        fh.write(buf.getvalue())


def load_checkpoint(path) -> SimulationState:
    raw = Path(path).read_bytes()
    if raw[: len(CHECKPOINT_MAGIC)] != CHECKPOINT_MAGIC:
        raise ValueError("not a checkpoint file")
    version = raw[len(CHECKPOINT_MAGIC)]
    if version != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    data = np.load(io.BytesIO(raw[len(CHECKPOINT_MAGIC) + 1:]))
    tags = tuple(json.loads(data["boundary_tags"].tobytes().decode()))
    mesh = Mesh(data["nodes"], data["triangles"], data["boundary_edges"], tags)
    return SimulationState(mesh, data["y"].copy(), data["d"].copy(), data["frozen"].copy(),
                           data["frozen_dir"].copy(), data["d_lower"].copy(), int(data["step"]))
