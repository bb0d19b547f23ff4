"""Vectorized 2D energies for element loops.

In 2D the crack energy depends on F only through a = |F t| and J = det F,
where t = (n2, -n1) is the crack tangent: A11 = a and A22 = J / a.  With
w(x, y) = W(diag(x, y)),

    Wd = w(a, A22*(a))   if J / a >= A22*(a)   (open)
    Wd = w(a, J / a)     otherwise             (closed)

Derivatives follow from da/dF = (F t) (x) t / a and dJ/dF = cof F.
"""

from __future__ import annotations

import numpy as np

from .materials import Family, MaterialModel

__all__ = [
    "supports_batch",
    "intact_energy_batch",
    "intact_stress_batch",
    "effective_batch",
    "a22_star_batch",
]


def supports_batch(model: MaterialModel) -> bool:
    return model.family in (Family.NEO_HOOKEAN_2D, Family.PQ_2D)


def _det(F):
    return F[:, 0, 0] * F[:, 1, 1] - F[:, 0, 1] * F[:, 1, 0]


def _cof(F):
    C = np.empty_like(F)
    C[:, 0, 0] = F[:, 1, 1]
    C[:, 0, 1] = -F[:, 1, 0]
    C[:, 1, 0] = -F[:, 0, 1]
    C[:, 1, 1] = F[:, 0, 0]
    return C


def intact_energy_batch(model: MaterialModel, F: np.ndarray) -> np.ndarray:
    J = _det(F)
    with np.errstate(invalid="ignore", divide="ignore"):
        lnJ = np.log(J)
    f2 = np.einsum("eij,eij->e", F, F)
    if model.family is Family.NEO_HOOKEAN_2D:
        W = 0.5 * model.mu * (f2 - 2.0 - 2.0 * lnJ) + 0.5 * model.lam * (J - 1.0) ** 2
    else:
        p = model.p
        c = 2.0 ** (0.5 * p)
        W = model.mu / p * (f2 ** (0.5 * p) - c - 0.5 * c * p * lnJ) + 0.5 * model.lambda_bar * (J - 1.0) ** 2
    return np.where(J > 0.0, W, np.inf)


def intact_stress_batch(model: MaterialModel, F: np.ndarray) -> np.ndarray:
    J = _det(F)
    cof = _cof(F)
    finv_t = cof / J[:, None, None]
    if model.family is Family.NEO_HOOKEAN_2D:
        return model.mu * (F - finv_t) + (model.lam * (J - 1.0) * J)[:, None, None] * finv_t
    p = model.p
    f2 = np.einsum("eij,eij->e", F, F)
    return (model.mu * (f2[:, None, None] ** (0.5 * p - 1.0) * F - 2.0 ** (0.5 * p - 1.0) * finv_t)
            + (model.lambda_bar * (J - 1.0) * J)[:, None, None] * finv_t)


def _diag_energy(model, x, y):
    if model.family is Family.NEO_HOOKEAN_2D:
        return (0.5 * model.mu * (x * x + y * y - 2.0 - 2.0 * np.log(x * y))
                + 0.5 * model.lam * (x * y - 1.0) ** 2)
    p = model.p
    c = 2.0 ** (0.5 * p)
    return (model.mu / p * ((x * x + y * y) ** (0.5 * p) - c - 0.5 * c * p * np.log(x * y))
            + 0.5 * model.lambda_bar * (x * y - 1.0) ** 2)


def _diag_partials(model, x, y):
    """(dw/dx, dw/dy) of w(x, y) = W(diag(x, y))."""
    if model.family is Family.NEO_HOOKEAN_2D:
        vol = model.lam * (x * y - 1.0)
        return model.mu * (x - 1.0 / x) + vol * y, model.mu * (y - 1.0 / y) + vol * x
    p = model.p
    s = (x * x + y * y) ** (0.5 * p - 1.0)
    c = 2.0 ** (0.5 * p - 1.0)
    vol = model.lambda_bar * (x * y - 1.0)
    return (model.mu * (s * x - c / x) + vol * y,
            model.mu * (s * y - c / y) + vol * x)


def a22_star_batch(model: MaterialModel, a: np.ndarray) -> np.ndarray:
    if model.family is Family.NEO_HOOKEAN_2D:
        mu, lam = model.mu, model.lam
        disc = 4.0 * mu * mu + 4.0 * mu * lam * a * a + lam * lam * a * a
        return (lam * a + np.sqrt(disc)) / (2.0 * (mu + lam * a * a))
    # (p,q): safeguarded Newton on the increasing derivative dw/dy
    lo = np.full_like(a, 1e-8)
    hi = np.maximum(4.0 / a, 4.0)
    while True:
        bad = _diag_partials(model, a, hi)[1] < 0.0
        if not bad.any():
            break
        hi = np.where(bad, 2.0 * hi, hi)
    x = np.clip(1.0 / a, lo * 2, hi / 2)
    mu, lb, p = model.mu, model.lambda_bar, model.p
    c = 2.0 ** (0.5 * p - 1.0)
    for _ in range(100):
        g = _diag_partials(model, a, x)[1]
        lo = np.where(g < 0.0, x, lo)
        hi = np.where(g > 0.0, x, hi)
        s = a * a + x * x
        h = (mu * s ** (0.5 * p - 1.0) + mu * (p - 2.0) * s ** (0.5 * p - 2.0) * x * x
             + mu * c / (x * x) + lb * a * a)
        xn = x - g / h
        out = (xn <= lo) | (xn >= hi)
        xn = np.where(out, 0.5 * (lo + hi), xn)
        if np.all(np.abs(xn - x) <= 1e-15 * np.abs(x)):
            x = xn
            break
        x = xn
    return x


def effective_batch(model: MaterialModel, F: np.ndarray, n: np.ndarray, need_dn: bool = True):
    """Wd, dWd/dF and dWd/dn for stacks of F (E,2,2) and unit n (E,2).

    Returns
    -------
    Wd : (E,) energies
    Pd : (E,2,2) stresses
    dn : (E,2) derivative with respect to n (unconstrained), or None
    """
    t = np.stack([n[:, 1], -n[:, 0]], axis=1)
    Ft = np.einsum("eij,ej->ei", F, t)
    a = np.sqrt(np.einsum("ei,ei->e", Ft, Ft))
    J = _det(F)
    y = J / a
    ys = a22_star_batch(model, a)
    open_ = y >= ys
    ye = np.where(open_, ys, y)
    Wd = _diag_energy(model, a, ye)
    wx, wy = _diag_partials(model, a, ye)
    # open: wy = 0 at ys (envelope); closed: chain rule through y = J / a
    phi_a = np.where(open_, wx, wx - wy * y / a)
    phi_J = np.where(open_, 0.0, wy / a)
    da = np.einsum("ei,ej->eij", Ft, t) / a[:, None, None]
    Pd = phi_a[:, None, None] * da + phi_J[:, None, None] * _cof(F)
    dn = None
    if need_dn:
        # t = Rn with R = [[0, 1], [-1, 0]]; da/dn = R^T F^T F t / a
        g = np.einsum("eji,ej->ei", F, Ft) / a[:, None]
        da_dn = np.stack([-g[:, 1], g[:, 0]], axis=1)
        dn = phi_a[:, None] * da_dn
    return Wd, Pd, dn
