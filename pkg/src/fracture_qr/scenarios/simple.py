"""Pointwise scenarios: orientation landscape and the splitting comparison."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..constitutive import MaterialModel, landscape_theta, local_minima
from ..errors import ConfigError
from ..splitting import splitting_report
from .config import ScenarioConfig
from .output import write_csv

__all__ = ["LandscapeResult", "run_landscape", "run_splitting_demo"]


@dataclass(frozen=True)
class LandscapeResult:
    theta: np.ndarray
    values: np.ndarray  # Wd / mu
    minima: list[int]


def run_landscape(config: ScenarioConfig, write: bool = True) -> LandscapeResult:
    """Wd(F, n(theta)) / mu over theta in [0, pi] with n = (cos theta, sin theta)."""
    model = config.material or MaterialModel.neo_hookean_2d(1.0, 1.0)
    if model.dim != 2:
        raise ConfigError("landscape needs a 2D material")
    F = np.asarray(config.options.get("F", [[1.0, 0.0], [0.0, 1.5]]), dtype=float)
    if F.shape != (2, 2) or np.linalg.det(F) <= 0.0:
        raise ConfigError("options.F must be a 2x2 matrix with positive determinant")
    samples = int(config.options.get("samples", 721))
    pts = landscape_theta(model, F, samples)
    theta = np.array([p[0] for p in pts])
    values = np.array([p[1] for p in pts]) / model.shear_modulus
    minima = local_minima(values)
    result = LandscapeResult(theta, values, minima)
    if write:
        out = config.output_dir
        out.mkdir(parents=True, exist_ok=True)
        write_csv(out / "landscape.csv", ["theta", "wd_over_mu"], zip(theta.tolist(), values.tolist()))
        write_csv(out / "landscape_minima.csv", ["index", "theta", "wd_over_mu"],
                  ((i, float(theta[i]), float(values[i])) for i in minima))
    return result


def run_splitting_demo(config: ScenarioConfig, write: bool = True):
    opts = config.options
    rows = splitting_report(lam=float(opts.get("lam", 2.0)), mu=float(opts.get("mu", 1.0)),
                            sigma0=float(opts.get("sigma0", 1.0)), tau=float(opts.get("tau", 1.0)))
    if write:
        out = config.output_dir
        out.mkdir(parents=True, exist_ok=True)
        comps = [f"{i}{j}" for i in range(1, 4) for j in range(1, 4)]
        header = (["method", "scenario"] + [f"split_{c}" for c in comps] + [f"qr_{c}" for c in comps]
                  + ["qr_normal_traction", "qr_shear_traction", "expected"])
        write_csv(out / "splitting_report.csv", header,
                  ([r.method, r.scenario, *map(float, r.sigma_split.ravel()), *map(float, r.sigma_qr.ravel()),
                    r.qr_normal_traction, r.qr_shear_traction, r.expected] for r in rows))
    return rows
