"""Intact stored-energy families and their first Piola-Kirchhoff stresses."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import DimensionMismatch, NonPositive
from ..kinematics import as_deformation_gradient

__all__ = [
    "Family",
    "MaterialModel",
    "intact_energy",
    "intact_stress",
    "fd_stress",
    "energy_unchecked",
    "stress_unchecked",
]


class Family(str, enum.Enum):
    NEO_HOOKEAN_2D = "NeoHookean2D"
    MOONEY_RIVLIN_3D = "MooneyRivlin3D"
    PQ_2D = "PQEnergy2D"
    PQ_3D = "PQEnergy3D"
    USER = "UserSupplied"


_DIM = {
    Family.NEO_HOOKEAN_2D: 2,
    Family.PQ_2D: 2,
    Family.MOONEY_RIVLIN_3D: 3,
    Family.PQ_3D: 3,
}

_PROBES = (
    np.diag([1.0, 1.0, 1.0]),
    np.diag([1.3, 0.8, 1.1]),
    np.array([[1.0, 0.4, 0.0], [0.0, 0.9, 0.2], [0.1, 0.0, 1.2]]),
)


@dataclass(frozen=True)
class MaterialModel:
    """Immutable intact-energy description.

    Parameter usage per family:

    * ``NeoHookean2D``: ``mu``, ``lam``.
    * ``MooneyRivlin3D``: ``mu1``, ``mu2``, ``lambda_bar``.
    * ``PQEnergy2D``: ``mu`` (the shear weight), ``lambda_bar``, ``p``.
    * ``PQEnergy3D``: ``mu1``, ``mu2``, ``lambda_bar``, ``p``, ``q``.
    * ``UserSupplied``: ``user_energy`` callable and ``user_dim``.

    ``g_c`` is the fracture toughness used by the phase-field energy.
    """

    family: Family
    mu: float = 0.0
    lam: float = 0.0
    mu1: float = 0.0
    mu2: float = 0.0
    lambda_bar: float = 0.0
    p: float = 2.0
    q: float = 2.0
    g_c: float = 1.0
    user_energy: Callable[[np.ndarray], float] | None = field(default=None, compare=False)
    user_dim: int = 0
    user_lame: tuple[float, float] | None = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        fam = self.family
        if self.g_c <= 0:
            raise NonPositive("g_c must be positive")
        if fam is Family.NEO_HOOKEAN_2D:
            _positive(mu=self.mu)
            # lambda = 0 is admitted: growth runs switch off Poisson coupling
            _nonnegative(lam=self.lam)
        elif fam is Family.MOONEY_RIVLIN_3D:
            _positive(mu1=self.mu1, mu2=self.mu2, lambda_bar=self.lambda_bar)
        elif fam is Family.PQ_2D:
            _positive(mu=self.mu, lambda_bar=self.lambda_bar)
            _at_least_one(p=self.p)
        elif fam is Family.PQ_3D:
            _positive(mu1=self.mu1, mu2=self.mu2, lambda_bar=self.lambda_bar)
            _at_least_one(p=self.p, q=self.q)
        else:
            if self.user_energy is None or self.user_dim not in (2, 3):
                raise ValueError("UserSupplied needs user_energy and user_dim in {2, 3}")
            for P in _PROBES:
                val = self.user_energy(P[: self.user_dim, : self.user_dim])
                if not np.isfinite(val):
                    raise ValueError("user energy is not finite on the probe set")

    # -- constructors ---------------------------------------------------
    @classmethod
    def neo_hookean_2d(cls, mu: float, lam: float, g_c: float = 1.0) -> "MaterialModel":
        return cls(Family.NEO_HOOKEAN_2D, mu=mu, lam=lam, g_c=g_c)

    @classmethod
    def mooney_rivlin_3d(cls, mu1: float, mu2: float, lambda_bar: float,
                         g_c: float = 1.0) -> "MaterialModel":
        return cls(Family.MOONEY_RIVLIN_3D, mu1=mu1, mu2=mu2, lambda_bar=lambda_bar, g_c=g_c)

    @classmethod
    def pq_2d(cls, p: float, mu_bar: float, lambda_bar: float, g_c: float = 1.0) -> "MaterialModel":
        return cls(Family.PQ_2D, mu=mu_bar, lambda_bar=lambda_bar, p=p, g_c=g_c)

    @classmethod
    def pq_3d(cls, p: float, q: float, mu1: float, mu2: float, lambda_bar: float,
              g_c: float = 1.0) -> "MaterialModel":
        return cls(Family.PQ_3D, mu1=mu1, mu2=mu2, lambda_bar=lambda_bar, p=p, q=q, g_c=g_c)

    @classmethod
    def user_supplied(cls, energy: Callable[[np.ndarray], float], dim: int,
                      lame: tuple[float, float] | None = None, g_c: float = 1.0) -> "MaterialModel":
        return cls(Family.USER, user_energy=energy, user_dim=dim, user_lame=lame, g_c=g_c)

    # -- derived quantities ---------------------------------------------
    @property
    def dim(self) -> int:
        return self.user_dim if self.family is Family.USER else _DIM[self.family]

    @property
    def is_mooney_rivlin_type(self) -> bool:
        """Families whose energy decouples A_nn from the crack shears."""
        if self.family in (Family.NEO_HOOKEAN_2D, Family.MOONEY_RIVLIN_3D):
            return True
        if self.family is Family.PQ_2D:
            return self.p == 2.0
        if self.family is Family.PQ_3D:
            return self.p == 2.0 and self.q == 2.0
        return False

    def lame(self) -> tuple[float, float]:
        """Lame parameters (lambda, mu) of the linearization at the identity."""
        fam = self.family
        if fam is Family.NEO_HOOKEAN_2D:
            return self.lam, self.mu
        if fam is Family.MOONEY_RIVLIN_3D:
            return self.lambda_bar + 2.0 * self.mu2, self.mu1 + self.mu2
        if self.user_lame is not None:
            return self.user_lame
        raise ValueError(f"no closed-form Lame parameters for {fam.value}")

    @property
    def shear_modulus(self) -> float:
        """Normalization scale for energies and stresses."""
        if self.family in (Family.NEO_HOOKEAN_2D, Family.PQ_2D):
            return self.mu
        if self.family in (Family.MOONEY_RIVLIN_3D, Family.PQ_3D):
            return self.mu1 + self.mu2
        return self.user_lame[1] if self.user_lame else 1.0


def _positive(**kw):
    for k, v in kw.items():
        if not v > 0:
            raise NonPositive(f"{k} must be positive, got {v}")


def _nonnegative(**kw):
    for k, v in kw.items():
        if not v >= 0:
            raise NonPositive(f"{k} must be non-negative, got {v}")


def _at_least_one(**kw):
    for k, v in kw.items():
        if not v >= 1:
            raise ValueError(f"exponent {k} must be >= 1, got {v}")


def _check(model: MaterialModel, F) -> np.ndarray:
    return as_deformation_gradient(F, model.dim)


def _cof_sq(F: np.ndarray, C: np.ndarray) -> float:
    """|cof F|^2 = ((tr C)^2 - tr C^2) / 2 in 3D."""
    trC = np.trace(C)
    return 0.5 * (trC * trC - np.sum(C * C))


def _det3(F: np.ndarray) -> float:
    (a, b, c), (d, e, f), (g, h, i) = F.tolist()
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)


def _det_inv_t(F: np.ndarray) -> tuple[float, np.ndarray]:
    """det F and F^{-T} by explicit cofactors."""
    if F.shape[0] == 2:
        a, b, c, d = F[0, 0], F[0, 1], F[1, 0], F[1, 1]
        J = a * d - b * c
        return J, np.array([[d, -c], [-b, a]]) / J
    (a, b, c), (d, e, f), (g, h, i) = F.tolist()
    cof = np.array([[e * i - f * h, f * g - d * i, d * h - e * g],
                    [c * h - b * i, a * i - c * g, b * g - a * h],
                    [b * f - c * e, c * d - a * f, a * e - b * d]])
    J = a * cof[0, 0] + b * cof[0, 1] + c * cof[0, 2]
    return J, cof / J


def intact_energy(model: MaterialModel, F) -> float:
    """Intact stored energy density W(F)."""
    return energy_unchecked(model, _check(model, F))


def intact_stress(model: MaterialModel, F) -> np.ndarray:
    """First Piola-Kirchhoff stress dW/dF."""
    return stress_unchecked(model, _check(model, F))


def energy_unchecked(model: MaterialModel, F: np.ndarray) -> float:
    """W(F) without validation; returns inf for det F <= 0."""
    fam = model.family
    if fam is Family.USER:
        return float(model.user_energy(F))
    if F.shape[0] == 2:
        J = F[0, 0] * F[1, 1] - F[0, 1] * F[1, 0]
    else:
        J = _det3(F)
    if J <= 0.0:
        return np.inf
    lnJ = np.log(J)
    f2 = float(np.sum(F * F))
    if fam is Family.NEO_HOOKEAN_2D:
        return 0.5 * model.mu * (f2 - 2.0 - 2.0 * lnJ) + 0.5 * model.lam * (J - 1.0) ** 2
    if fam is Family.PQ_2D:
        p = model.p
        c = 2.0 ** (0.5 * p)
        return (model.mu / p * (f2 ** (0.5 * p) - c - 0.5 * c * p * lnJ)
                + 0.5 * model.lambda_bar * (J - 1.0) ** 2)
    C = F.T @ F
    g2 = _cof_sq(F, C)
    if fam is Family.MOONEY_RIVLIN_3D:
        return (0.5 * model.mu1 * (f2 - 2.0 * lnJ - 3.0)
                + 0.5 * model.mu2 * (g2 - 4.0 * lnJ - 3.0)
                + 0.5 * model.lambda_bar * (J - 1.0) ** 2)
    p, q = model.p, model.q
    cp, cq = 3.0 ** (0.5 * p), 3.0 ** (0.5 * q)
    return (model.mu1 / p * (f2 ** (0.5 * p) - cp - cp / 3.0 * p * lnJ)
            + model.mu2 / q * (g2 ** (0.5 * q) - cq - 2.0 * cq / 3.0 * q * lnJ)
            + 0.5 * model.lambda_bar * (J - 1.0) ** 2)


def stress_unchecked(model: MaterialModel, F: np.ndarray) -> np.ndarray:
    """dW/dF without validation."""
    fam = model.family
    if fam is Family.USER:
        return fd_stress(model.user_energy, F)
    J, Finv_T = _det_inv_t(F)
    vol = model.lambda_bar if fam is not Family.NEO_HOOKEAN_2D else model.lam
    P = vol * (J - 1.0) * J * Finv_T
    f2 = float(np.sum(F * F))
    if fam is Family.NEO_HOOKEAN_2D:
        return P + model.mu * (F - Finv_T)
    if fam is Family.PQ_2D:
        p = model.p
        return P + model.mu * (f2 ** (0.5 * p - 1.0) * F - 2.0 ** (0.5 * p - 1.0) * Finv_T)
    C = F.T @ F
    dcof = np.trace(C) * F - F @ C  # half the derivative of |cof F|^2
    if fam is Family.MOONEY_RIVLIN_3D:
        return P + model.mu1 * (F - Finv_T) + model.mu2 * (dcof - 2.0 * Finv_T)
    p, q = model.p, model.q
    g2 = _cof_sq(F, C)
    return (P + model.mu1 * (f2 ** (0.5 * p - 1.0) * F - 3.0 ** (0.5 * p - 1.0) * Finv_T)
            + model.mu2 * (g2 ** (0.5 * q - 1.0) * dcof - 2.0 * 3.0 ** (0.5 * q - 1.0) * Finv_T))


def fd_stress(energy: Callable[[np.ndarray], float], F: np.ndarray) -> np.ndarray:
    """Central-difference gradient with step 1e-6 * max(1, |F|)."""
    F = np.asarray(F, dtype=float)
    h = 1e-6 * max(1.0, float(np.linalg.norm(F)))
    P = np.zeros_like(F)
    for idx in np.ndindex(F.shape):
        Fp = F.copy()
        Fm = F.copy()
        Fp[idx] += h
        Fm[idx] -= h
        P[idx] = (energy(Fp) - energy(Fm)) / (2.0 * h)
    return P


def check_dimension(model: MaterialModel, dim: int) -> None:
    if model.dim != dim:
        raise DimensionMismatch(f"{model.family.value} is {model.dim}D, got {dim}D input")
