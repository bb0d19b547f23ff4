"""Quasi-static crack growth: cyclic shear of a notched square and a cracked cavity."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..constitutive import MaterialModel
from ..errors import ConfigError, NotConverged
from ..fem.energy import evaluate
from ..fem.mesh import Mesh
from ..fem.solvers import affine_predictor, apply_irreversibility, staggered_step
from ..fem.state import BoundaryCondition, PhaseFieldParams, SimulationState, check_resolution
from .config import LoadStep, ScenarioConfig, SeedCrack
from .frozen_crack import state_fields
from .output import write_csv, write_vtk

__all__ = [
    "StepRecord",
    "GrowthHistory",
    "seed_state",
    "run_program",
    "crack_tip",
    "run_cyclic_shear",
    "cyclic_shear_metrics",
    "CyclicShearMetrics",
    "run_cavity",
    "CavityResult",
    "seed_growth",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class StepRecord:
    step: int
    load: float
    energy: float
    elastic_energy: float
    max_d: float
    n_frozen: int
    tip: tuple[float, float]
    sweeps: int


@dataclass
class GrowthHistory:
    records: list[StepRecord] = field(default_factory=list)
    frozen_at: np.ndarray | None = None  # load-step index at which each node froze (-1: never)
    states: dict[str, SimulationState] = field(default_factory=dict)

    def rows(self):
        for r in self.records:
            yield (r.step, r.load, r.energy, r.elastic_energy, r.max_d, r.n_frozen, r.tip[0], r.tip[1], r.sweeps)


SUMMARY_HEADER = ["step", "load", "energy", "elastic_energy", "max_d", "n_frozen", "tip_x", "tip_y", "sweeps"]


def seed_state(mesh: Mesh, seeds: list[SeedCrack], tol: float | None = None) -> SimulationState:
    """Initial state with nodes within ``tol`` of each seed frozen at its normal."""
    st = SimulationState.initial(mesh)
    if tol is None:
        tol = 0.5 * float(np.median(mesh.edge_lengths()))
    for s in seeds:
        nodes = np.flatnonzero(s.distance(mesh.nodes) <= tol)
        if len(nodes) == 0:
            raise ConfigError("seed crack does not touch any mesh node")
        st.freeze(nodes, s.direction(mesh.nodes[nodes]))
    return st


def crack_tip(state: SimulationState, origin, grown: np.ndarray | None = None) -> tuple[float, float]:
    """Frozen node farthest from ``origin`` (the origin itself if none).

    ``grown`` restricts the search to nodes frozen by growth, so seed nodes
    never count as the tip.
    """
    mask = state.frozen if grown is None else state.frozen & grown
    idx = np.flatnonzero(mask)
    if len(idx) == 0:
        return float(origin[0]), float(origin[1])
    X = state.mesh.nodes[idx]
    k = int(np.argmax(np.linalg.norm(X - np.asarray(origin), axis=1)))
    return float(X[k, 0]), float(X[k, 1])


def _record(state, model, params, step, load, sweeps, origin, grown=None) -> StepRecord:
    t = evaluate(state.mesh, state.y, state.d, model, params, False, False)
    return StepRecord(step, float(load), t.energy, float(np.dot(state.mesh.area, t.elastic_density)),
                      float(np.linalg.norm(state.d, axis=1).max()), int(state.frozen.sum()),
                      crack_tip(state, origin, grown), sweeps)


def run_program(state: SimulationState, model: MaterialModel, params: PhaseFieldParams,
                program: list[LoadStep], bcs_for, *, origin=(0.0, 0.0), history: GrowthHistory | None = None,
                shrink_threshold: int | None = None, shrink_factor: float = 0.5, min_fraction: float = 1e-3,
                overrelax: float = 1.0, on_step=None, F_start=None) -> tuple[SimulationState, GrowthHistory]:
    """Drive ``state`` through the load program with staggered steps.

    When a step needs more than ``shrink_threshold`` sweeps it is repeated
    from the last converged state with the increment scaled by
    ``shrink_factor`` (down to ``min_fraction`` of the nominal increment).
    ``overrelax`` is passed to :func:`staggered_step`.
    """
    history = history or GrowthHistory()
    if history.frozen_at is None:
        history.frozen_at = np.where(state.frozen, 0, -1)
    F_prev = np.eye(2) if F_start is None else np.asarray(F_start, dtype=float)
    for ls in program:
        F_target = ls.F0
        frac_done, frac = 0.0, 1.0
        while frac_done < 1.0 - 1e-12:
            frac = min(frac, 1.0 - frac_done)
            F_try = F_prev + frac * (F_target - F_prev) / (1.0 - frac_done)
            trial = state.copy()
            affine_predictor(trial, F_prev, F_try)
            try:
                trial, rep = staggered_step(trial, model, params, bcs_for(F_try), overrelax=overrelax)
                sweeps = rep.iterations
            except NotConverged as exc:
                exc.step = ls.step
                sweeps = None
                if shrink_threshold is None or frac * shrink_factor < min_fraction:
                    raise
            if shrink_threshold is not None and (sweeps is None or sweeps > shrink_threshold) \
                    and frac * shrink_factor >= min_fraction:
                frac *= shrink_factor
                log.info("step %d: %s sweeps, shrinking increment to %.4g", ls.step, sweeps, frac)
                continue
            apply_irreversibility(trial, params)
            newly = trial.frozen & (history.frozen_at < 0)
            history.frozen_at[newly] = len(history.records) + 1
            state, F_prev = trial, F_try
            frac_done += frac
            load = ls.load_of(F_try)
            rec = _record(state, model, params, ls.step, load, sweeps, origin, history.frozen_at > 0)
            history.records.append(rec)
            log.info("step %d load %.5g: sweeps %d, frozen %d, max|d| %.3f", ls.step, load, sweeps,
                     rec.n_frozen, rec.max_d)
            if on_step is not None:
                on_step(state, rec)
    return state, history


# ---------------------------------------------------------------------------
# Cyclic shear
# ---------------------------------------------------------------------------

DEFAULT_NOTCH = SeedCrack("segment", ((0.0, 0.5), (0.5, 0.5)), normal=(0.0, 1.0))


@dataclass(frozen=True)
class CyclicShearMetrics:
    kink_angle: float  # degrees, direction of first-phase growth from the notch tip
    branch_angle: float  # degrees, direction of second-phase growth from the kink
    branch_distance: float  # distance from the kink to the nearest second-phase crack node
    n_phase1: int
    n_phase2: int
    closed_signature: float  # |closed-crack mean - surrounding mean| / peak density
    kinked: bool
    branched: bool


def _growth_direction(X: np.ndarray, origin: np.ndarray) -> float:
    if len(X) == 0:
        return float("nan")
    v = (X - origin).mean(axis=0)
    return float(np.degrees(np.arctan2(v[1], v[0])))


def cyclic_shear_metrics(state: SimulationState, model: MaterialModel, params: PhaseFieldParams,
                         history: GrowthHistory, reversal_index: int, notch_tip=(0.5, 0.5)) -> CyclicShearMetrics:
    """Qualitative measures of kinking, branching and crack closure.

    ``reversal_index`` is the number of records in the first (right) phase.
    """
    mesh = state.mesh
    tip = np.asarray(notch_tip, dtype=float)
    fa = history.frozen_at
    p1 = np.flatnonzero((fa >= 1) & (fa <= reversal_index))
    p2 = np.flatnonzero(fa > reversal_index)
    X = mesh.nodes
    kink_angle = _growth_direction(X[p1], tip)
    branch_angle = _growth_direction(X[p2], tip)
    branch_distance = float(np.min(np.linalg.norm(X[p2] - tip, axis=1))) if len(p2) else float("inf")
    t = evaluate(mesh, state.y, state.d, model, params, False, False)
    dens = t.elastic_density
    in_p1 = np.zeros(mesh.n_nodes, dtype=bool)
    in_p1[p1] = True
    el_p1 = in_p1[mesh.triangles].all(axis=1)
    signature = float("nan")
    if el_p1.any():
        c = mesh.centroids()
        dmag = np.linalg.norm(state.d[mesh.triangles].mean(axis=1), axis=1)
        near = np.min(np.linalg.norm(c[:, None, :] - X[p1][None, :, :], axis=2), axis=1) <= 3.0 * params.epsilon
        ring = near & (dmag <= 0.05)
        ref = float(np.mean(dens[ring])) if ring.any() else 0.0
        signature = abs(float(np.mean(dens[el_p1])) - ref) / float(dens.max())
    h = float(np.median(mesh.edge_lengths()))
    kinked = bool(len(p1) > 0 and -85.0 <= kink_angle <= -10.0)
    branched = bool(len(p2) > 0 and branch_distance <= 3.0 * h and branch_angle > kink_angle + 10.0)
    return CyclicShearMetrics(kink_angle, branch_angle, branch_distance, len(p1), len(p2), signature,
                              kinked, branched)


def run_cyclic_shear(config: ScenarioConfig, mesh: Mesh | None = None, write: bool = True):
    """Shear right then left; returns (final state, history, metrics)."""
    model = config.material or MaterialModel.neo_hookean_2d(1.0, 0.0, g_c=1e-3)
    params = config.params
    opts = config.options
    mesh = mesh if mesh is not None else config.build_mesh()
    for tag in ("bottom", "top"):
        if tag not in mesh.tags:
            raise ConfigError(f"cyclic-shear mesh needs a {tag!r} boundary")
    check_resolution(mesh, params)
    seeds = config.seed_cracks or [DEFAULT_NOTCH]
    state = seed_state(mesh, seeds)
    if opts.get("nonnegative_damage", True):
        state.d_lower[:] = 0.0
    program = config.load_program
    if not program:
        raise ConfigError("cyclic-shear needs a load program")
    shears = [ls.F0[0, 1] for ls in program]
    peak = int(np.argmax(shears)) if max(shears) > 0 else len(program) - 1
    notch_tip = np.asarray(seeds[0].points[-1], dtype=float)

    def bcs_for(F0):
        if config.boundary_conditions:
            return config.boundary_conditions_for(mesh, F0)
        return [BoundaryCondition("bottom", "zero"), BoundaryCondition("top", "affine", F0)]

    out = config.output_dir
    vtk_every = int(opts.get("vtk_every", 1))
    if write:
        out.mkdir(parents=True, exist_ok=True)
    counter = [0]

    def on_step(st, rec):
        counter[0] += 1
        if write and vtk_every and counter[0] % vtk_every == 0:
            dens = evaluate(mesh, st.y, st.d, model, params, False, False).elastic_density
            write_vtk(mesh, state_fields(st, dens), out / f"cyclic_shear_{counter[0]:04d}.vtk",
                      title=f"cyclic shear step {rec.step} load {rec.load:.6g}")

    kw = dict(origin=notch_tip, on_step=on_step, shrink_threshold=opts.get("shrink_threshold"),
              overrelax=float(opts.get("overrelax", 1.0)))
    state, history = run_program(state, model, params, program[: peak + 1], bcs_for, **kw)
    reversal_index = len(history.records)
    history.states["right"] = state.copy()
    state, history = run_program(state, model, params, program[peak + 1:], bcs_for, history=history,
                                 F_start=program[peak].F0, **kw)
    history.states["left"] = state.copy()
    metrics = cyclic_shear_metrics(state, model, params, history, reversal_index, notch_tip)
    if write:
        write_csv(out / "cyclic_shear_summary.csv", SUMMARY_HEADER, history.rows())
        write_csv(out / "cyclic_shear_metrics.csv", list(CyclicShearMetrics.__dataclass_fields__),
                  [tuple(getattr(metrics, k) if not isinstance(getattr(metrics, k), bool)
                         else int(getattr(metrics, k)) for k in CyclicShearMetrics.__dataclass_fields__)])
    return state, history, metrics


# ---------------------------------------------------------------------------
# Cavity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CavityResult:
    grown: list[int]  # indices of seed cracks that grew in tension
    n_seeds: int
    closure_error: float  # relative L2 error of the final compression field vs intact
    history: GrowthHistory


def default_cavity_seeds(radius: float, length: float, count: int = 8) -> list[SeedCrack]:
    seeds = []
    for k in range(count):
        th = 2.0 * np.pi * k / count
        u = np.array([np.cos(th), np.sin(th)])
        seeds.append(SeedCrack("segment", (tuple(radius * u), tuple((radius + length) * u)),
                               normal=(-u[1], u[0])))
    return seeds


def seed_growth(state: SimulationState, seeds: list[SeedCrack], history: GrowthHistory,
                first: int, last: int, min_nodes: int = 2) -> list[int]:
    """Seeds whose ray gained at least ``min_nodes`` frozen nodes in records first..last."""
    X = state.mesh.nodes
    fa = history.frozen_at
    new = np.flatnonzero((fa >= first) & (fa <= last))
    grown = []
    for k, s in enumerate(seeds):
        a, b = np.array(s.points[0]), np.array(s.points[-1])
        u = (b - a) / np.linalg.norm(b - a)
        rel = X[new] - a
        along = rel @ u
        perp = np.abs(rel @ np.array([-u[1], u[0]]))
        mine = (along > np.linalg.norm(b - a)) & (perp <= 0.5 * along)
        if mine.sum() >= min_nodes:
            grown.append(k)
    return grown


def nodal_energy(state: SimulationState, model: MaterialModel, params: PhaseFieldParams) -> np.ndarray:
    t = evaluate(state.mesh, state.y, state.d, model, params, False, False)
    return state.mesh.nodal_average(t.elastic_density)


def relative_l2(mesh: Mesh, a: np.ndarray, b: np.ndarray) -> float:
    w = mesh.lumped_mass()
    return float(np.sqrt(np.dot(w, (a - b) ** 2) / np.dot(w, b ** 2)))


def run_cavity(config: ScenarioConfig, mesh: Mesh | None = None, write: bool = True) -> CavityResult:
    """Compression, tension, compression of a square with a pre-cracked circular cavity.

    The load program is split into phases at sign changes of (stretch - 1).
    The final compressed nodal energy field is compared with an intact
    specimen under the same compression.
    """
    model = config.material or MaterialModel.neo_hookean_2d(1.0, 0.0, g_c=1e-3)
    params = config.params
    opts = config.options
    mesh = mesh if mesh is not None else config.build_mesh()
    if "outer" not in mesh.tags:
        raise ConfigError("cavity mesh needs an 'outer' boundary")
    hole_r = float(np.min(np.linalg.norm(mesh.nodes, axis=1)))
    seeds = config.seed_cracks or default_cavity_seeds(hole_r, float(opts.get("seed_length", 0.05)))
    state = seed_state(mesh, seeds)
    program = config.load_program
    if not program:
        raise ConfigError("cavity needs a load program")

    def bcs_for(F0):
        if config.boundary_conditions:
            return config.boundary_conditions_for(mesh, F0)
        return [BoundaryCondition("outer", "affine", F0)]

    stretches = [ls.F0[0, 0] for ls in program]
    phases: list[list[LoadStep]] = [[program[0]]]
    for prev, ls, s in zip(stretches, program[1:], stretches[1:]):
        if (s > 1.0) != (prev > 1.0):
            phases.append([])
        phases[-1].append(ls)
    out = config.output_dir
    if write:
        out.mkdir(parents=True, exist_ok=True)
    kw = dict(shrink_threshold=opts.get("shrink_threshold", 25), overrelax=float(opts.get("overrelax", 1.0)),
              shrink_factor=float(opts.get("shrink_factor", 0.5)),
              min_fraction=float(opts.get("min_fraction", 1.0 / 64.0)))
    history = GrowthHistory()
    F_prev = np.eye(2)
    bounds = []
    for k, phase in enumerate(phases):
        start = len(history.records) + 1
        state, history = run_program(state, model, params, phase, bcs_for, history=history,
                                     F_start=F_prev, **kw)
        F_prev = phase[-1].F0
        bounds.append((start, len(history.records)))
        history.states[f"phase{k}"] = state.copy()
        if write:
            dens = evaluate(mesh, state.y, state.d, model, params, False, False).elastic_density
            write_vtk(mesh, state_fields(state, dens), out / f"cavity_phase{k}.vtk",
                      title=f"cavity phase {k} stretch {phase[-1].F0[0, 0]:.6g}")
    tension = [i for i, ph in enumerate(phases) if ph[0].F0[0, 0] > 1.0]
    grown = seed_growth(state, seeds, history, *bounds[tension[0]]) if tension else []

    # intact specimen under the final compression
    intact = SimulationState.initial(mesh)
    F_last = phases[-1][-1].F0
    intact, _ = run_program(intact, model, params, [LoadStep(0, F_last)], bcs_for)
    e_cracked = nodal_energy(state, model, params)
    e_intact = nodal_energy(intact, model, params)
    err = relative_l2(mesh, e_cracked, e_intact)
    if write:
        write_csv(out / "cavity_summary.csv", SUMMARY_HEADER, history.rows())
        write_csv(out / "cavity_closure.csv", ["node", "x", "y", "energy_cracked", "energy_intact"],
                  ((i, float(x), float(y), float(a), float(b))
                   for i, ((x, y), a, b) in enumerate(zip(mesh.nodes, e_cracked, e_intact))))
        write_csv(out / "cavity_metrics.csv", ["n_seeds", "n_grown", "grown", "closure_error"],
                  [(len(seeds), len(grown), " ".join(map(str, grown)), err)])
    return CavityResult(grown, len(seeds), err, history)
