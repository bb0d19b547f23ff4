"""Scenario configuration: JSON loading, schema validation, nondimensionalization.

Stresses are normalized by the shear modulus and lengths by
``material.length_scale`` (default 1, i.e. already nondimensional), so
``g_c`` becomes ``G_c / (mu * length_scale)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from ..constitutive import MaterialModel
from ..errors import ConfigError
from ..fem.mesh import Mesh, read_mesh, rectangle_mesh, square_with_hole_mesh
from ..fem.state import BoundaryCondition, PhaseFieldParams

__all__ = [
    "SCENARIOS",
    "LoadStep",
    "SeedCrack",
    "ScenarioConfig",
    "load_schema",
    "load_config",
    "config_from_dict",
    "default_config",
]

SCENARIOS = ("frozen-crack", "cyclic-shear", "cavity", "landscape", "splitting-demo")

_DEFAULT_FILES = {
    "frozen-crack": "frozen_crack.json",
    "cyclic-shear": "cyclic_shear.json",
    "cavity": "cavity.json",
    "landscape": "landscape.json",
    "splitting-demo": "splitting_demo.json",
}


@dataclass(frozen=True)
class LoadStep:
    """One load increment: applied affine map F0 (or its scalar shorthand)."""

    step: int
    F0: np.ndarray
    kind: str = "F0"  # "shear", "stretch" or "F0"

    def load_of(self, F: np.ndarray) -> float:
        """Scalar load parameter of an applied map of this kind."""
        return float(F[0, 1]) if self.kind == "shear" else float(F[0, 0])


@dataclass(frozen=True)
class SeedCrack:
    """Segment or arc along which nodes are seeded with a frozen unit d."""

    kind: str
    points: tuple[tuple[float, float], ...]
    radius: float = 0.0
    theta: tuple[float, float] = (0.0, 0.0)
    normal: tuple[float, float] | None = None

    def distance(self, X: np.ndarray) -> np.ndarray:
        if self.kind == "segment":
            a, b = np.array(self.points[0]), np.array(self.points[1])
            ab = b - a
            t = np.clip((X - a) @ ab / max(ab @ ab, 1e-300), 0.0, 1.0)
            return np.linalg.norm(X - (a + t[:, None] * ab), axis=1)
        c = np.array(self.points[0])
        rel = X - c
        ang = np.mod(np.arctan2(rel[:, 1], rel[:, 0]) - self.theta[0], 2.0 * np.pi)
        span = np.mod(self.theta[1] - self.theta[0], 2.0 * np.pi) or 2.0 * np.pi
        on_arc = np.abs(np.linalg.norm(rel, axis=1) - self.radius)
        ends = [c + self.radius * np.array([np.cos(t), np.sin(t)]) for t in self.theta]
        to_end = np.minimum(*(np.linalg.norm(X - e, axis=1) for e in ends))
        return np.where(ang <= span, on_arc, to_end)

    def direction(self, X: np.ndarray) -> np.ndarray:
        """Unit crack normal at points X (default: perpendicular to the curve)."""
        if self.normal is not None:
            v = np.array(self.normal, dtype=float)
            return np.broadcast_to(v / np.linalg.norm(v), X.shape).copy()
        if self.kind == "segment":
            ab = np.subtract(self.points[1], self.points[0])
            v = np.array([-ab[1], ab[0]]) / np.linalg.norm(ab)
            return np.broadcast_to(v, X.shape).copy()
        rel = X - np.array(self.points[0])
        tang = np.column_stack([-rel[:, 1], rel[:, 0]])
        return tang / np.linalg.norm(tang, axis=1)[:, None]


@dataclass
class ScenarioConfig:
    scenario: str
    material: MaterialModel | None
    params: PhaseFieldParams
    load_program: list[LoadStep]
    mesh_spec: dict[str, Any] | None
    output_dir: Path
    seed_cracks: list[SeedCrack]
    boundary_conditions: list[dict[str, Any]] = field(default_factory=list)
    options: dict[str, Any] = field(default_factory=dict)
    seed: int = 0
    mu_physical: float = 1.0

    def build_mesh(self) -> Mesh:
        spec = self.mesh_spec
        if spec is None:
            raise ConfigError(f"scenario {self.scenario!r} needs a mesh")
        if "path" in spec:
            path = Path(spec["path"])
            if not path.is_file():
                raise ConfigError(f"mesh file {path} does not exist")
            return read_mesh(path)
        kw = {k: v for k, v in spec.items() if k != "generator"}
        if spec["generator"] == "rectangle":
            return rectangle_mesh(kw.pop("nx", 50), kw.pop("ny", 50), **kw)
        return square_with_hole_mesh(**kw)

    def boundary_conditions_for(self, mesh: Mesh, F0: np.ndarray) -> list[BoundaryCondition]:
        """Instantiate configured BCs with the current applied map; tags are checked."""
        out = []
        for bc in self.boundary_conditions:
            if bc["tag"] not in mesh.tags:
                raise ConfigError(f"boundary tag {bc['tag']!r} not present in mesh")
            out.append(BoundaryCondition(bc["tag"], bc["kind"], F0, tuple(bc.get("mask", (True, True)))))
        return out


def load_schema() -> dict:
    return json.loads(resources.files(__package__).joinpath("schema.json").read_text())


def default_config(scenario: str) -> dict:
    if scenario not in _DEFAULT_FILES:
        raise ConfigError(f"unknown scenario {scenario!r}")
    return json.loads(resources.files(__package__).joinpath(_DEFAULT_FILES[scenario]).read_text())


def _material(spec: dict | None) -> tuple[MaterialModel | None, float]:
    if spec is None:
        return None, 1.0
    family = spec.get("family", "NeoHookean2D")
    length = spec.get("length_scale", 1.0)
    try:
        if family == "NeoHookean2D":
            mu = spec.get("mu", 1.0)
            g_c = spec.get("g_c", mu * length) / (mu * length)
            return MaterialModel.neo_hookean_2d(1.0, spec.get("lam", 0.0) / mu, g_c=g_c), mu
        mu = spec.get("mu_bar", 1.0)
        g_c = spec.get("g_c", mu * length) / (mu * length)
        return MaterialModel.pq_2d(spec.get("p", 2.0), 1.0, spec.get("lambda_bar", 0.0) / mu, g_c=g_c), mu
    except ValueError as exc:
        raise ConfigError(f"invalid material: {exc}") from exc


def _load_program(items: list[dict]) -> list[LoadStep]:
    steps = []
    for it in items:
        if "F0" in it:
            F0, kind = np.array(it["F0"], dtype=float), "F0"
        elif "shear" in it:
            F0, kind = np.array([[1.0, it["shear"]], [0.0, 1.0]]), "shear"
        else:
            F0, kind = float(it["stretch"]) * np.eye(2), "stretch"
        if np.linalg.det(F0) <= 0.0:
            raise ConfigError(f"load step {it['step']}: det F0 must be positive")
        steps.append(LoadStep(int(it["step"]), F0, kind))
    idx = [s.step for s in steps]
    if any(b <= a for a, b in zip(idx, idx[1:])):
        raise ConfigError("load steps must be strictly increasing")
    return steps


def _seeds(items: list[dict]) -> list[SeedCrack]:
    out = []
    for it in items:
        normal = tuple(it["normal"]) if "normal" in it else None
        if normal is not None and np.linalg.norm(normal) == 0.0:
            raise ConfigError("seed crack normal must be nonzero")
        if it["type"] == "segment":
            out.append(SeedCrack("segment", (tuple(it["start"]), tuple(it["end"])), normal=normal))
        else:
            out.append(SeedCrack("arc", (tuple(it["center"]),), it["radius"],
                                 (it["theta0"], it["theta1"]), normal))
    return out


def config_from_dict(raw: dict, base_dir: Path | None = None) -> ScenarioConfig:
    """Validate a configuration dictionary and build a :class:`ScenarioConfig`."""
    try:
        jsonschema.validate(raw, load_schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {exc.message}") from exc
    base_dir = Path(base_dir) if base_dir is not None else Path.cwd()
    try:
        params = PhaseFieldParams(**raw.get("params", {}))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    material, mu = _material(raw.get("material"))
    mesh_spec = raw.get("mesh")
    if mesh_spec is not None and "path" in mesh_spec:
        path = Path(mesh_spec["path"])
        mesh_spec = {"path": str(path if path.is_absolute() else base_dir / path)}
        if not Path(mesh_spec["path"]).is_file():
            raise ConfigError(f"mesh file {mesh_spec['path']} does not exist")
    out = Path(raw.get("output_dir", "output"))
    return ScenarioConfig(
        scenario=raw["scenario"],
        material=material,
        params=params,
        load_program=_load_program(raw.get("load_program", [])),
        mesh_spec=mesh_spec,
        output_dir=out if out.is_absolute() else base_dir / out,
        seed_cracks=_seeds(raw.get("seed_cracks", [])),
        boundary_conditions=list(raw.get("boundary_conditions", [])),
        options=dict(raw.get("options", {})),
        seed=int(raw.get("seed", 0)),
        mu_physical=mu,
    )


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config file {path} does not exist") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    return config_from_dict(raw, path.parent)
