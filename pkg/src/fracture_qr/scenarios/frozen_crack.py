"""Frozen circular crack under homogeneous affine loading modes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..constitutive import MaterialModel, a22_star
from ..errors import ConfigError
from ..fem.energy import crack_normals, crack_terms, deformation_gradients, evaluate, intact_terms
from ..fem.mesh import Mesh
from ..fem.solvers import solve_displacement
from ..fem.state import BoundaryCondition, PhaseFieldParams, SimulationState
from ..kinematics import frame_from_normal, qr_in_frame
from .config import ScenarioConfig
from .output import write_csv, write_vtk

__all__ = ["FROZEN_MODES", "mode_gradient", "circular_crack_state", "FrozenCrackResult",
           "frozen_crack_metrics", "run_frozen_crack", "state_fields"]

FROZEN_MODES = ("a", "b", "c", "d", "e", "d-relaxed")
CRACK_LEVEL = 0.95
INTACT_LEVEL = 0.05


def mode_gradient(mode: str, model: MaterialModel, amplitude: float = 0.1) -> np.ndarray:
    """Applied affine map for each loading mode of a crack with normal e2.

    a: normal opening, b: crack-face shear, c: tangential compression,
    d: tangential stretch, e: normal compression, d-relaxed: tangential
    stretch with the normal stretch at its traction-free value.
    """
    s = amplitude
    if mode == "a":
        return np.diag([1.0, 1.0 + s])
    if mode == "b":
        return np.array([[1.0, s], [0.0, 1.0]])
    if mode == "c":
        return np.diag([1.0 - s, 1.0])
    if mode == "d":
        return np.diag([1.0 + s, 1.0])
    if mode == "e":
        return np.diag([1.0, 1.0 - s])
    if mode == "d-relaxed":
        return np.diag([1.0 + s, a22_star(model, 1.0 + s)])
    raise ConfigError(f"unknown frozen-crack mode {mode!r}; expected one of {FROZEN_MODES}")


def circular_crack_state(mesh: Mesh, center, radius: float, epsilon: float,
                         normal=(0.0, 1.0)) -> SimulationState:
    """d = normal inside the disk (frozen), decaying as exp(-(r - R) / eps) outside."""
    st = SimulationState.initial(mesh)
    r = np.linalg.norm(mesh.nodes - np.asarray(center, dtype=float), axis=1)
    nvec = np.asarray(normal, dtype=float) / np.linalg.norm(normal)
    mag = np.where(r <= radius, 1.0, np.exp(-(r - radius) / epsilon))
    st.d = mag[:, None] * nvec
    st.freeze(np.flatnonzero(r <= radius), nvec)
    return st


@dataclass(frozen=True)
class FrozenCrackResult:
    mode: str
    crack_mean: float
    intact_mean: float
    ratio: float
    uniformity: float
    newton_iterations: int
    converged: bool
    density: np.ndarray


def frozen_crack_metrics(mesh: Mesh, d: np.ndarray, density: np.ndarray) -> tuple[float, float, float]:
    """Crack-region mean, intact-region mean and max relative deviation from the mean."""
    dmag = np.linalg.norm(d[mesh.triangles].mean(axis=1), axis=1)
    crack = dmag >= CRACK_LEVEL
    intact = dmag <= INTACT_LEVEL
    mean = float(np.dot(mesh.area, density) / mesh.area.sum())
    crack_mean = float(np.dot(mesh.area[crack], density[crack]) / mesh.area[crack].sum())
    intact_mean = float(np.dot(mesh.area[intact], density[intact]) / mesh.area[intact].sum())
    uniformity = float(np.max(np.abs(density - mean)) / mean) if mean > 0 else 0.0
    return crack_mean, intact_mean, uniformity


def state_fields(state: SimulationState, density: np.ndarray) -> dict[str, np.ndarray]:
    """Standard point-data arrays: displacement, |d|, d and nodal energy density."""
    mesh = state.mesh
    return {
        "displacement": state.y - mesh.nodes,
        "damage_magnitude": np.linalg.norm(state.d, axis=1),
        "damage": state.d,
        "energy_density": mesh.nodal_average(density),
    }


def _traction_line(state, model, params, y_line):
    """Crack-frame traction of the effective stress on elements crossed by y = y_line."""
    mesh = state.mesh
    X = mesh.nodes[mesh.triangles]
    hit = np.flatnonzero((X[:, :, 1].min(axis=1) <= y_line) & (X[:, :, 1].max(axis=1) > y_line))
    c = mesh.centroids()[hit]
    order = hit[np.lexsort((c[:, 1], c[:, 0]))]
    F = deformation_gradients(mesh, state.y)[order]
    de = state.d[mesh.triangles[order]].mean(axis=1)
    r = np.linalg.norm(de, axis=1)
    n = crack_normals(F, de, r, params.guard_tol)
    _, P = intact_terms(model, F)
    _, Pd, _ = crack_terms(model, F, n, False)
    g1 = (1.0 - r) ** 2 + params.eta
    g2 = r * (2.0 - r)
    rows = []
    for k, e in enumerate(order):
        Peff = g1[k] * P[k] + g2[k] * Pd[k]
        frame = frame_from_normal(n[k], 2)
        R, _ = qr_in_frame(F[k], frame)
        S = frame.to_frame(R.T @ Peff)
        rows.append((int(e), float(mesh.centroids()[e, 0]), float(r[k]), float(S[1, 1]), float(S[0, 1])))
    return rows


def run_frozen_crack(config: ScenarioConfig, mesh: Mesh | None = None, write: bool = True) -> FrozenCrackResult:
    model = config.material or MaterialModel.neo_hookean_2d(1.0, 2.576 / 1.104)
    params = config.params
    opts = config.options
    mode = opts.get("mode", "a")
    mesh = mesh if mesh is not None else config.build_mesh()
    lo, hi = mesh.nodes.min(axis=0), mesh.nodes.max(axis=0)
    center = opts.get("center", list(0.5 * (lo + hi)))
    radius = float(opts.get("radius", 0.15 * float(np.min(hi - lo))))
    state = circular_crack_state(mesh, center, radius, params.epsilon, opts.get("normal", (0.0, 1.0)))
    F0 = (config.load_program[-1].F0 if config.load_program
          else mode_gradient(mode, model, float(opts.get("amplitude", 0.1))))
    tags = sorted(mesh.tags)
    if not tags:
        raise ConfigError("frozen-crack mesh needs tagged boundary edges")
    bcs = (config.boundary_conditions_for(mesh, F0) if config.boundary_conditions
           else [BoundaryCondition(t, "affine", F0) for t in tags])
    state.y = mesh.nodes @ F0.T
    rep = solve_displacement(state, model, params, bcs)
    density = evaluate(mesh, state.y, state.d, model, params, False, False).elastic_density
    crack_mean, intact_mean, uniformity = frozen_crack_metrics(mesh, state.d, density)
    result = FrozenCrackResult(mode, crack_mean, intact_mean, crack_mean / intact_mean, uniformity,
                               rep.iterations, rep.converged, density)
    if write:
        out = config.output_dir
        out.mkdir(parents=True, exist_ok=True)
        stem = f"frozen_crack_{mode}"
        write_vtk(mesh, state_fields(state, density), out / f"{stem}.vtk", title=f"frozen crack mode {mode}")
        c = mesh.centroids()
        dmag = np.linalg.norm(state.d[mesh.triangles].mean(axis=1), axis=1)
        write_csv(out / f"{stem}_energy.csv", ["element", "x", "y", "damage_magnitude", "energy_density"],
                  ((e, float(c[e, 0]), float(c[e, 1]), float(dmag[e]), float(density[e]))
                   for e in range(mesh.n_elements)))
        write_csv(out / f"{stem}_deformation.csv", ["node", "x", "y", "y1", "y2"],
                  ((i, float(x), float(yv), float(a), float(b))
                   for i, ((x, yv), (a, b)) in enumerate(zip(mesh.nodes, state.y))))
        write_csv(out / f"{stem}_traction.csv", ["element", "x", "damage_magnitude", "normal", "shear"],
                  _traction_line(state, model, params, float(center[1])))
        write_csv(out / f"{stem}_summary.csv",
                  ["mode", "crack_mean", "intact_mean", "ratio", "uniformity", "newton_iterations", "converged"],
                  [(mode, crack_mean, intact_mean, result.ratio, uniformity, rep.iterations, int(rep.converged))])
    return result
