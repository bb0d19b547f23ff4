"""Staggered minimization: displacement solve, damage solve, irreversibility."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..constitutive.materials import MaterialModel
from ..errors import LineSearchFailed, NotConverged
from .energy import crack_normals, crack_terms, deformation_gradients, evaluate, intact_cache, intact_terms
from .state import PhaseFieldParams, SimulationState, dirichlet_values

__all__ = [
    "SolveReport",
    "StaggerReport",
    "solve_displacement",
    "solve_damage",
    "staggered_step",
    "apply_irreversibility",
    "project_damage",
    "affine_predictor",
]

log = logging.getLogger(__name__)

ARMIJO = 1e-4
ROUNDING = 1e-13
# Newton stalls where the crack energy has a curvature kink (branch switch);
# give up after this many iterations without halving the residual.
STALL_ITERS = 10


@dataclass(frozen=True)
class SolveReport:
    iterations: int
    residual: float
    energy: float
    converged: bool


@dataclass
class StaggerReport:
    iterations: int = 0
    residual: float = np.inf
    energies: list[float] = field(default_factory=list)
    displacement: list[SolveReport] = field(default_factory=list)
    damage: list[SolveReport] = field(default_factory=list)


# ---------------------------------------------------------------------------
# Displacement
# ---------------------------------------------------------------------------

def _element_tangent(mesh, y, d, model, params):
    """dP_eff/dF per element (M, 4, 4) by central differences, symmetrized."""
    F = deformation_gradients(mesh, y)
    de = d[mesh.triangles].mean(axis=1)
    r = np.linalg.norm(de, axis=1)
    n = crack_normals(F, de, r, params.guard_tol)
    g1 = (1.0 - r) ** 2 + params.eta
    g2 = r * (2.0 - r)
    h = 1e-6 * np.maximum(1.0, np.abs(F).max(axis=(1, 2)))
    D = np.empty((len(F), 4, 4))
    for k in range(4):
        i, j = divmod(k, 2)
        out = []
        for sgn in (1.0, -1.0):
            Fp = F.copy()
            Fp[:, i, j] += sgn * h
            _, P = intact_terms(model, Fp)
            _, Pd, _ = crack_terms(model, Fp, n, False)
            out.append(g1[:, None, None] * P + g2[:, None, None] * Pd)
        D[:, :, k] = ((out[0] - out[1]) / (2.0 * h[:, None, None])).reshape(-1, 4)
    return 0.5 * (D + D.transpose(0, 2, 1))


def _project_psd(D, floor):
    w, V = np.linalg.eigh(D)
    return np.einsum("eik,ek,ejk->eij", V, np.maximum(w, floor), V)


def _stiffness(mesh, D):
    G, area = mesh.grad, mesh.area
    D4 = D.reshape(-1, 2, 2, 2, 2)  # (e, i, j, k, l)
    Ke = area[:, None, None, None, None] * np.einsum("eijkl,eaj,ebl->eaibk", D4, G, G)
    Ke = Ke.reshape(-1, 6, 6)
    dof = (2 * mesh.triangles[:, :, None] + np.arange(2)[None, None, :]).reshape(-1, 6)
    rows = np.repeat(dof, 6, axis=1).ravel()
    cols = np.tile(dof, (1, 6)).ravel()
    n = 2 * mesh.n_nodes
    return sp.coo_matrix((Ke.ravel(), (rows, cols)), shape=(n, n)).tocsr()


def _newton_direction(mesh, D, g, free):
    """Solve K p = -g on the free dofs; None unless p is a finite descent direction."""
    K = _stiffness(mesh, D)[free][:, free]
    p = np.zeros_like(g)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", spla.MatrixRankWarning)
        p[free] = -spla.spsolve(K.tocsc(), g[free])
    slope = float(g @ p)
    if not (np.all(np.isfinite(p)) and slope < 0.0):
        return None, 0.0
    return p, slope


def _length_scale(mesh) -> float:
    return float(np.sqrt(np.mean(mesh.area)))


def solve_displacement(state: SimulationState, model: MaterialModel, params: PhaseFieldParams,
                       bcs, tol: float | None = None, max_iter: int = 100) -> SolveReport:
    """Minimize the energy over y at fixed d (Newton with line search), in place.

    Dirichlet components are set to their prescribed values first.  Each
    iteration tries the exact tangent; if that gives no descent direction
    the element tangents are projected to positive semidefinite.  Steps
    are backtracked on the energy, and steps that invert an element have
    infinite energy and are rejected.
    """
    mesh = state.mesh
    fixed, vals = dirichlet_values(mesh, bcs)
    y = state.y.copy()
    y[fixed] = vals[fixed]
    free = ~fixed.ravel()
    mu = model.shear_modulus
    if tol is None:
        tol = 1e-8 * mu * _length_scale(mesh)
    floor = 1e-9 * mu

    terms = evaluate(mesh, y, state.d, model, params, True, False)
    E, g = terms.energy, terms.grad_y.ravel()
    res = float(np.abs(g[free]).max(initial=0.0))
    it = 0
    best, best_it = res, 0
    while res > tol and it < max_iter and it - best_it < STALL_ITERS:
        it += 1
        D = _element_tangent(mesh, y, state.d, model, params)
        p, slope = _newton_direction(mesh, D, g, free)
        if p is None:
            # element tangents are indefinite: fall back to the convexified system
            p, slope = _newton_direction(mesh, _project_psd(D, floor), g, free)
        if p is None:
            p = np.where(free, -g, 0.0)
            slope = float(g @ p)
        alpha, accepted = 1.0, False
        for _ in range(60):
            y_try = y + alpha * p.reshape(-1, 2)
            t = evaluate(mesh, y_try, state.d, model, params, True, False, check=False)
            if np.isfinite(t.energy):
                g_try = t.grad_y.ravel()
                r_try = float(np.abs(g_try[free]).max(initial=0.0))
                if t.energy <= E + ARMIJO * alpha * slope:
                    accepted = True
                elif t.energy <= E + ROUNDING * abs(E) and r_try <= 0.5 * res:
                    accepted = True
                if accepted:
                    break
            alpha *= 0.5
        if not accepted:
            if res <= 1e3 * tol:
                break
            raise LineSearchFailed(f"displacement line search failed (residual {res:.3e})")
        y, E, g, res = y_try, t.energy, g_try, r_try
        if res <= 0.5 * best:
            best, best_it = res, it
    state.y = y
    converged = res <= tol
    if not converged:
        log.warning("displacement solve stopped at residual %.3e after %d iterations", res, it)
    return SolveReport(it, res, E, converged)


# ---------------------------------------------------------------------------
# Damage
# ---------------------------------------------------------------------------

def project_damage(d: np.ndarray, lower: np.ndarray, frozen: np.ndarray, frozen_dir: np.ndarray) -> np.ndarray:
    """Clip to componentwise lower bounds, scale into the unit ball, pin frozen nodes."""
    out = np.maximum(d, lower)
    mag = np.linalg.norm(out, axis=1)
    big = mag > 1.0
    out[big] /= mag[big, None]
    out[frozen] = frozen_dir[frozen]
    return out


def solve_damage(state: SimulationState, model: MaterialModel, params: PhaseFieldParams,
                 tol: float = 1e-6, max_iter: int = 2000) -> SolveReport:
    """Minimize the energy over d at fixed y (spectral projected gradient), in place.

    The gradient is scaled by the lumped mass and by eps / G_c so that the
    step is dimensionless; stationarity is measured as the max-norm of the
    projected scaled-gradient step.
    """
    mesh = state.mesh
    scale = (params.epsilon / model.g_c) / mesh.lumped_mass()[:, None]
    lower, frozen, fdir = state.d_lower, state.frozen, state.frozen_dir

    def proj(x):
        return project_damage(x, lower, frozen, fdir)

    cache = intact_cache(mesh, state.y, model)

    def energy_grad(x):
        t = evaluate(mesh, state.y, x, model, params, False, True, cache=cache)
        return t.energy, t.grad_d * scale

    d = proj(state.d)
    E, g = energy_grad(d)
    res = float(np.abs(proj(d - g) - d).max())
    lam = 1.0
    it = 0
    while res > tol and it < max_iter:
        it += 1
        step = proj(d - lam * g) - d
        slope = float(np.sum(step * g / scale))
        alpha = 1.0
        while True:
            d_try = d + alpha * step
            E_try, g_try = energy_grad(d_try)
            if E_try <= E + ARMIJO * alpha * slope or (E_try <= E and alpha < 1e-12):
                break
            alpha *= 0.5
            if alpha < 1e-14:
                d_try, E_try, g_try = d, E, g
                break
        s = d_try - d
        yv = g_try - g
        sy = float(np.sum(s * yv / scale))
        if alpha < 1e-14 or not np.any(s):
            res = float(np.abs(proj(d - g) - d).max())
            break
        lam = float(np.clip(np.sum(s * s / scale) / sy, 1e-6, 1e6)) if sy > 0 else 1e6
        d, E, g = d_try, E_try, g_try
        res = float(np.abs(proj(d - g) - d).max())
    state.d = d
    return SolveReport(it, res, E, res <= tol)


# ---------------------------------------------------------------------------
# Staggering and irreversibility
# ---------------------------------------------------------------------------

def _overrelax(st, model, params, d_prev, omega, energy):
    """Extrapolate the damage update by omega; keep it only if the energy does not rise."""
    d_try = project_damage(d_prev + omega * (st.d - d_prev), st.d_lower, st.frozen, st.frozen_dir)
    e_try = evaluate(st.mesh, st.y, d_try, model, params, False, False).energy
    if e_try <= energy:
        st.d = d_try
        return e_try
    return energy


def staggered_step(state: SimulationState, model: MaterialModel, params: PhaseFieldParams,
                   bcs, damage_tol: float = 1e-6, overrelax: float = 1.0) -> tuple[SimulationState, StaggerReport]:
    """Alternate displacement and damage solves until the max nodal update < stagger_tol.

    With ``overrelax > 1`` each damage update is extrapolated,
    d <- P(d_prev + overrelax (d* - d_prev)), and kept only when it does
    not increase the energy.  Returns a new state; the input is not
    modified.  Raises :class:`NotConverged` after ``params.max_stagger``
    sweeps.
    """
    st = state.copy()
    report = StaggerReport()
    for k in range(1, params.max_stagger + 1):
        y0, d0 = st.y.copy(), st.d.copy()
        report.displacement.append(solve_displacement(st, model, params, bcs))
        report.energies.append(report.displacement[-1].energy)
        report.damage.append(solve_damage(st, model, params, tol=damage_tol))
        energy = report.damage[-1].energy
        if overrelax != 1.0:
            energy = _overrelax(st, model, params, d0, overrelax, energy)
        report.energies.append(energy)
        dy = np.linalg.norm(st.y - y0, axis=1).max()
        dd = np.linalg.norm(st.d - d0, axis=1).max()
        report.iterations = k
        report.residual = float(max(dy, dd))
        log.debug("sweep %d: dy=%.3e dd=%.3e E=%.10g", k, dy, dd, report.energies[-1])
        if report.residual < params.stagger_tol:
            return st, report
    raise NotConverged(f"staggered iteration did not converge in {params.max_stagger} sweeps",
                       report.residual, state.step)


def apply_irreversibility(state: SimulationState, params: PhaseFieldParams) -> SimulationState:
    """Freeze nodes with |d| >= d_c at the unit vector d / |d| (in place)."""
    mag = np.linalg.norm(state.d, axis=1)
    new = (mag >= params.d_c) & ~state.frozen
    if new.any():
        unit = state.d[new] / mag[new, None]
        state.frozen[new] = True
        state.frozen_dir[new] = unit
        state.d[new] = unit
    return state


def affine_predictor(state: SimulationState, F_old, F_new) -> None:
    """Shift y by the change of the applied affine map (in place)."""
    dF = np.asarray(F_new, dtype=float) - np.asarray(F_old, dtype=float)
    state.y = state.y + state.mesh.nodes @ dF.T

