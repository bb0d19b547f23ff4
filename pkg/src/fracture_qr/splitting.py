"""Energy-splitting baselines for comparison with the QR crack energy.

Two classical splits assign only the "compressive" part of the linear
elastic energy to the crack:

* principal-strain split: sigma = sum_a (lam <tr eps>_- + 2 mu <eps_a>_-) n_a (x) n_a
* hydrostatic-deviatoric split: sigma = kappa <tr eps>_- I, kappa = lam + 2 mu / 3

Neither depends on the crack orientation.  :func:`splitting_report`
tabulates their predictions next to the QR crack response for a set of
far-field states with the crack normal along e2.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .small_strain import ElasticityTensor, wdlin_stress

__all__ = [
    "SplitMethod",
    "SplitStress",
    "miehe_split_stress",
    "amor_split_stress",
    "splitting_report",
    "ReportRow",
    "uniaxial_parallel_strain",
    "shear_strain",
    "uniaxial_normal_compression_strain",
]


class SplitMethod(str, enum.Enum):
    PRINCIPAL_STRAIN = "PrincipalStrain"
    HYDRO_DEVIATORIC = "HydroDeviatoric"


@dataclass(frozen=True)
class SplitStress:
    sigma: np.ndarray
    method: SplitMethod


def _strain3(eps) -> np.ndarray:
    eps = np.asarray(eps, dtype=float)
    if eps.shape != (3, 3):
        raise ValueError(f"expected a 3x3 strain, got {eps.shape}")
    return 0.5 * (eps + eps.T)


def miehe_split_stress(eps, mu: float, lam: float) -> SplitStress:
    """Crack stress of the principal-strain split."""
    eps = _strain3(eps)
    w, V = np.linalg.eigh(eps)
    tr_neg = min(float(np.sum(w)), 0.0)
    coef = lam * tr_neg + 2.0 * mu * np.minimum(w, 0.0)
    sigma = (V * coef) @ V.T
    return SplitStress(0.5 * (sigma + sigma.T), SplitMethod.PRINCIPAL_STRAIN)


def amor_split_stress(eps, mu: float, lam: float) -> SplitStress:
    """Crack stress of the hydrostatic-deviatoric split."""
    eps = _strain3(eps)
    kappa = lam + 2.0 * mu / 3.0
    return SplitStress(kappa * min(float(np.trace(eps)), 0.0) * np.eye(3), SplitMethod.HYDRO_DEVIATORIC)


# ---------------------------------------------------------------------------
# Far-field states (crack normal e2)
# ---------------------------------------------------------------------------

def uniaxial_parallel_strain(sigma0: float, mu: float, lam: float) -> np.ndarray:
    """Strain of the far-field stress sigma0 e1 (x) e1."""
    k = sigma0 / (mu * (3.0 * lam + 2.0 * mu))
    return k * np.diag([lam + mu, -lam / 2.0, -lam / 2.0])


def shear_strain(tau: float, mu: float) -> np.ndarray:
    eps = np.zeros((3, 3))
    eps[0, 1] = eps[1, 0] = tau / (2.0 * mu)
    return eps


def uniaxial_normal_compression_strain(sigma0: float, mu: float, lam: float) -> np.ndarray:
    """Strain of the far-field stress -sigma0 e2 (x) e2."""
    k = sigma0 / (mu * (3.0 * lam + 2.0 * mu))
    return k * np.diag([lam / 2.0, -(lam + mu), lam / 2.0])


@dataclass(frozen=True)
class ReportRow:
    method: str
    scenario: str
    sigma_split: np.ndarray
    sigma_qr: np.ndarray
    qr_normal_traction: float
    qr_shear_traction: float
    expected: str


_EXPECTED = {
    ("PrincipalStrain", "uniaxial-tension-parallel"):
        "split loses the parallel stress and adds lateral compression",
    ("PrincipalStrain", "shear"): "split transmits shear traction across the crack",
    ("HydroDeviatoric", "uniaxial-tension-parallel"): "split transmits no stress",
    ("HydroDeviatoric", "uniaxial-compression-normal"):
        "split gives hydrostatic -sigma0/3 instead of the intact response",
}


def splitting_report(lam: float = 2.0, mu: float = 1.0, sigma0: float = 1.0,
                     tau: float = 1.0) -> list[ReportRow]:
    """Compare split stresses with the linearized QR crack stress (normal e2).

    The QR columns use the isotropic linearized crack energy; tractions are
    the (e2, e2) and (e1, e2) components of its stress.
    """
    if not (mu > 0 and lam >= 0):
        raise ValueError("need mu > 0 and lam >= 0")
    C = ElasticityTensor.isotropic(lam, mu, 3)
    n = np.array([0.0, 1.0, 0.0])
    states = {
        "uniaxial-tension-parallel": uniaxial_parallel_strain(sigma0, mu, lam),
        "shear": shear_strain(tau, mu),
        "uniaxial-compression-normal": uniaxial_normal_compression_strain(sigma0, mu, lam),
    }
    rows = []
    for method, fn in (("PrincipalStrain", miehe_split_stress), ("HydroDeviatoric", amor_split_stress)):
        for scen, eps in states.items():
            key = (method, scen)
            if key not in _EXPECTED:
                continue
            sig = fn(eps, mu, lam).sigma
            sq = wdlin_stress(eps, n, C)
            rows.append(ReportRow(method, scen, sig, sq, float(sq[1, 1]), float(sq[0, 1]), _EXPECTED[key]))
    return rows
