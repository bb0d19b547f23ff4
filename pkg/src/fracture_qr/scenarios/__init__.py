"""Scenario drivers, configuration and output writers."""

from .config import (
    SCENARIOS,
    LoadStep,
    ScenarioConfig,
    SeedCrack,
    config_from_dict,
    default_config,
    load_config,
    load_schema,
)
from .frozen_crack import FROZEN_MODES, FrozenCrackResult, mode_gradient, run_frozen_crack
from .growth import CavityResult, CyclicShearMetrics, run_cavity, run_cyclic_shear
from .output import read_vtk, write_csv, write_vtk
from .simple import LandscapeResult, run_landscape, run_splitting_demo

__all__ = [
    "SCENARIOS",
    "LoadStep",
    "ScenarioConfig",
    "SeedCrack",
    "config_from_dict",
    "default_config",
    "load_config",
    "load_schema",
    "FROZEN_MODES",
    "FrozenCrackResult",
    "mode_gradient",
    "run_frozen_crack",
    "CavityResult",
    "CyclicShearMetrics",
    "run_cavity",
    "run_cyclic_shear",
    "read_vtk",
    "write_csv",
    "write_vtk",
    "LandscapeResult",
    "run_landscape",
    "run_splitting_demo",
    "run_scenario",
]


def run_scenario(config: ScenarioConfig):
    """Dispatch on ``config.scenario`` and write outputs to ``config.output_dir``."""
    runners = {
        "frozen-crack": run_frozen_crack,
        "cyclic-shear": run_cyclic_shear,
        "cavity": run_cavity,
        "landscape": run_landscape,
        "splitting-demo": run_splitting_demo,
    }
    return runners[config.scenario](config)
