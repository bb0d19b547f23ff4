"""Discrete regularized fracture energy on P1 triangles.

With one-point quadrature per element (centroid value d_e of the nodal
damage, r = |d_e|, n = d_e / r) the element energy density is

    ((1 - r)^2 + eta) W(F) + (1 - (1 - r)^2) Wd(F, n)
        + G_c (r^2 / (2 eps) + eps / 2 |grad d|^2)

and F = grad y is constant on each triangle.  Where r < guard_tol the
normal is taken as the direction of maximal stretch (the weight of Wd is
then below 2 guard_tol).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..constitutive.batch import effective_batch, intact_energy_batch, intact_stress_batch, supports_batch
from ..constitutive.materials import MaterialModel, check_dimension, energy_unchecked, stress_unchecked
from ..constitutive.relaxation import effective_energy, effective_stress
from ..errors import ElementInverted
from .mesh import Mesh
from .state import PhaseFieldParams, SimulationState

__all__ = [
    "EnergyTerms",
    "IntactCache",
    "deformation_gradients",
    "crack_normals",
    "total_energy",
    "evaluate",
    "element_energy_density",
]


@dataclass(frozen=True)
class EnergyTerms:
    """Total energy, its gradients and per-element diagnostics."""

    energy: float
    grad_y: np.ndarray | None
    grad_d: np.ndarray | None
    density: np.ndarray  # total energy density per element
    elastic_density: np.ndarray  # g1 W + g2 Wd per element
    det: np.ndarray


@dataclass(frozen=True)
class IntactCache:
    """Deformation-only quantities, reusable while y is fixed."""

    F: np.ndarray
    J: np.ndarray
    W: np.ndarray
    P: np.ndarray


def _nodal_gradient(mesh: Mesh, v: np.ndarray) -> np.ndarray:
    """Element gradients of a nodal 2-vector field, (M, component, direction)."""
    return np.matmul(v[mesh.triangles].transpose(0, 2, 1), mesh.grad)


def _scatter(mesh: Mesh, contrib: np.ndarray) -> np.ndarray:
    """Sum element-node contributions (M, 3, 2) into nodes in a fixed order."""
    idx = mesh.triangles.ravel()
    out = np.empty((mesh.n_nodes, 2))
    for c in range(2):
        out[:, c] = np.bincount(idx, weights=contrib[:, :, c].ravel(), minlength=mesh.n_nodes)
    return out


def deformation_gradients(mesh: Mesh, y: np.ndarray) -> np.ndarray:
    """grad y per element, shape (M, 2, 2)."""
    return _nodal_gradient(mesh, y)


def _guard_normal(F: np.ndarray) -> np.ndarray:
    """Unit eigenvector of F^T F with the largest eigenvalue."""
    _, V = np.linalg.eigh(np.matmul(F.transpose(0, 2, 1), F))
    return V[:, :, -1]


def crack_normals(F: np.ndarray, de: np.ndarray, r: np.ndarray, guard_tol: float) -> np.ndarray:
    """d / |d| per element, or the guard normal where |d| < guard_tol."""
    guard = r < guard_tol
    n = de / np.where(guard, 1.0, r)[:, None]
    if guard.any():
        n[guard] = _guard_normal(F[guard])
    return n


def _crack_terms_scalar(model, F, n, need_dn):
    """Loop fallback for 2D models without a vectorized kernel."""
    E = len(F)
    Wd, Pd = np.empty(E), np.empty((E, 2, 2))
    dn = np.zeros((E, 2)) if need_dn else None
    h = 1e-6
    for e in range(E):
        Wd[e] = effective_energy(model, F[e], n[e]).energy
        Pd[e] = effective_stress(model, F[e], n[e])
        if need_dn:
            t = np.array([n[e, 1], -n[e, 0]])
            c, s = np.cos(h), np.sin(h)
            wp = effective_energy(model, F[e], c * n[e] - s * t).energy
            wm = effective_energy(model, F[e], c * n[e] + s * t).energy
            # rotation of n by +h moves it along -t; only this part of dn is used
            dn[e] = -(wp - wm) / (2.0 * h) * t
    return Wd, Pd, dn


def intact_terms(model: MaterialModel, F: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if supports_batch(model):
        return intact_energy_batch(model, F), intact_stress_batch(model, F)
    return (np.array([energy_unchecked(model, f) for f in F]),
            np.array([stress_unchecked(model, f) for f in F]))


def crack_terms(model: MaterialModel, F: np.ndarray, n: np.ndarray, need_dn: bool):
    if supports_batch(model):
        return effective_batch(model, F, n, need_dn)
    return _crack_terms_scalar(model, F, n, need_dn)


def intact_cache(mesh: Mesh, y: np.ndarray, model: MaterialModel) -> IntactCache:
    F = deformation_gradients(mesh, y)
    J = F[:, 0, 0] * F[:, 1, 1] - F[:, 0, 1] * F[:, 1, 0]
    if np.any(J <= 0.0):
        return IntactCache(F, J, np.full(len(F), np.inf), np.full_like(F, np.nan))
    W, P = intact_terms(model, F)
    return IntactCache(F, J, W, P)


def evaluate(mesh: Mesh, y: np.ndarray, d: np.ndarray, model: MaterialModel, params: PhaseFieldParams,
             want_grad_y: bool = True, want_grad_d: bool = True, check: bool = True,
             cache: IntactCache | None = None) -> EnergyTerms:
    """Energy and gradients for nodal fields (y, d).

    With ``check=False`` an inverted element yields ``energy = inf`` and no
    gradients instead of raising :class:`ElementInverted`.  ``cache`` must
    have been built from the same ``y``.
    """
    check_dimension(model, 2)
    if cache is None:
        cache = intact_cache(mesh, y, model)
    F, J, W, P = cache.F, cache.J, cache.W, cache.P
    if np.any(J <= 0.0):
        bad = int(np.flatnonzero(J <= 0.0)[0])
        if check:
            raise ElementInverted(bad, float(J[bad]))
        inf = np.full(mesh.n_elements, np.inf)
        return EnergyTerms(np.inf, None, None, inf, inf, J)

    area, G = mesh.area, mesh.grad
    de = d[mesh.triangles].mean(axis=1)
    r = np.sqrt(de[:, 0] ** 2 + de[:, 1] ** 2)
    n = crack_normals(F, de, r, params.guard_tol)
    Wd, Pd, dWdn = crack_terms(model, F, n, want_grad_d)

    g1 = (1.0 - r) ** 2 + params.eta
    g2 = r * (2.0 - r)
    grad_d_el = _nodal_gradient(mesh, d)
    eps, gc = params.epsilon, model.g_c
    elastic = g1 * W + g2 * Wd
    density = elastic + gc * (0.5 * r * r / eps + 0.5 * eps * np.sum(grad_d_el ** 2, axis=(1, 2)))
    energy = float(np.dot(area, density))

    gy = gd = None
    if want_grad_y:
        Peff = g1[:, None, None] * P + g2[:, None, None] * Pd
        gy = _scatter(mesh, area[:, None, None] * np.matmul(G, Peff.transpose(0, 2, 1)))
    if want_grad_d:
        # d/d(de) of g1 W + g2 Wd + G_c r^2 / (2 eps)
        proj = dWdn - np.sum(dWdn * n, axis=1)[:, None] * n
        dde = ((2.0 * (1.0 - r) * (Wd - W))[:, None] * n
               + (2.0 - r)[:, None] * proj
               + (gc / eps) * de)
        contrib = np.repeat((area[:, None] * dde / 3.0)[:, None, :], 3, axis=1)
        contrib += (gc * eps) * area[:, None, None] * np.matmul(G, grad_d_el.transpose(0, 2, 1))
        gd = _scatter(mesh, contrib)
    return EnergyTerms(energy, gy, gd, density, elastic, J)


def total_energy(state: SimulationState, model: MaterialModel,
                 params: PhaseFieldParams) -> tuple[float, np.ndarray, np.ndarray]:
    """Total discrete energy and its gradients with respect to y and d."""
    terms = evaluate(state.mesh, state.y, state.d, model, params)
    return terms.energy, terms.grad_y, terms.grad_d


def element_energy_density(state: SimulationState, model: MaterialModel,
                           params: PhaseFieldParams, elastic_only: bool = True) -> np.ndarray:
    """Per-element energy density (elastic part by default)."""
    terms = evaluate(state.mesh, state.y, state.d, model, params, False, False)
    return terms.elastic_density if elastic_only else terms.density
