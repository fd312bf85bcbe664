"""Scenario files: JSON schema, dataclass configs and precondition checks.

A scenario names a potential, a dimension, a list of energies and optional
per-subcommand blocks.  Structural validation uses JSON Schema; the
module-level preconditions (admissible points, grid sizes, ...) are checked
afterwards, still before any computation, and report the offending key path.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import jsonschema
import numpy as np

from .geometry import DELTA_MIN
from .potentials import FAMILIES, EvaluationError, Potential, evaluate, from_spec

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_posint = {"type": "integer", "minimum": 1}
_vec = {"type": "array", "items": _num, "minItems": 1}
_points = {"type": "array", "items": _vec, "minItems": 1}
_energies = {"type": "array", "items": _num, "minItems": 1}

SCHEMA = {
    "type": "object",
    "required": ["schema_version", "name", "potential", "dimension", "energies"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string", "minLength": 1},
        "description": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        "output": {"type": "string"},
        "dimension": {"type": "integer", "minimum": 1, "maximum": 8},
        "energies": _energies,
        "potential": {
            "type": "object",
            "required": ["family"],
            "properties": {
                "family": {"enum": list(FAMILIES)},
                "mass": _pos,
                "hbar": _pos,
                "params": {"type": "object"},
            },
        },
        "geometry": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"energies": _energies, "points": _points, "n_points": _posint, "box": _pos, "h": _pos, "tolerance": _pos},
        },
        "geodesic": {
            "type": "object",
            "additionalProperties": False,
            "required": ["x0", "v0", "span"],
            "properties": {"x0": _vec, "v0": _vec, "span": _pos, "tol": _pos, "tolerance": _pos,
                           "n_samples": _posint},
        },
        "dewitt": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"energies": _energies, "xi": {"type": "array", "items": _num, "minItems": 1}, "points": _points,
                           "n_points": _posint, "box": _pos, "h": _pos},
        },
        "density": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "energies": _energies,
                "points": _points,
                "grid": {
                    "type": "object",
                    "required": ["lo", "hi", "n"],
                    "additionalProperties": False,
                    "properties": {"lo": _vec, "hi": _vec, "n": {"type": "array", "items": _posint, "minItems": 1}},
                },
                "order": {"enum": [0, 1, 2]},
                "tolerance": _pos,
            },
        },
        "oracle": {
            "type": "object",
            "additionalProperties": False,
            "required": ["x_min", "x_max", "n_grid", "n_states"],
            "properties": {"energies": _energies, "x_min": _num, "x_max": _num, "n_grid": {"type": "integer", "minimum": 3},
                           "n_states": _posint, "eta": _pos, "richardson": {"type": "boolean"},
                           "tolerance": _pos, "n_out": _posint},
        },
        "compare": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"energies": _energies, "eta": _pos, "fraction": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                           "tolerance": _pos, "order": {"enum": [0, 1, 2]}},
        },
        "hydrogen": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"dims": {"type": "array", "items": {"type": "integer", "minimum": 2}, "minItems": 1},
                           "p_e": {"type": "array", "items": _pos, "minItems": 1},
                           "n_points": _posint, "tolerance": _pos},
        },
        "validate": {"type": "object", "additionalProperties": False, "properties": {}},
    },
}


@dataclass(frozen=True)
class GeometryBlock:
    energies: Optional[list] = None  # overrides the scenario energies
    points: Optional[list] = None
    n_points: int = 20
    box: float = 1.0
    h: float = 1e-4
    tolerance: float = 1e-4


@dataclass(frozen=True)
class GeodesicBlock:
    x0: list
    v0: list
    span: float
    tol: float = 1e-9
    tolerance: float = 1e-6
    n_samples: int = 401


@dataclass(frozen=True)
class DewittBlock:
    energies: Optional[list] = None  # overrides the scenario energies
    xi: Optional[list] = None  # default: conformal coupling and 1/6
    points: Optional[list] = None
    n_points: int = 5
    box: float = 1.0
    h: float = 1e-4


@dataclass(frozen=True)
class DensityBlock:
    energies: Optional[list] = None  # overrides the scenario energies
    points: Optional[list] = None
    grid: Optional[dict] = None
    order: int = 2
    tolerance: float = 1e-12


@dataclass(frozen=True)
class OracleBlock:
    x_min: float
    x_max: float
    n_grid: int
    n_states: int
    eta: float = 2.0
    richardson: bool = False
    tolerance: Optional[float] = None  # harmonic potentials only: eigenvalue error bound
    n_out: int = 201
    energies: Optional[list] = None


@dataclass(frozen=True)
class CompareBlock:
    energies: Optional[list] = None  # overrides the scenario energies
    eta: Optional[float] = None  # falls back to oracle.eta
    fraction: float = 0.7
    tolerance: float = 0.05
    order: int = 2


@dataclass(frozen=True)
class HydrogenBlock:
    dims: list = field(default_factory=lambda: [3])
    p_e: list = field(default_factory=lambda: [1.0])
    n_points: int = 20
    tolerance: float = 1e-5


@dataclass(frozen=True)
class Scenario:
    name: str
    potential: Potential
    dimension: int
    energies: list
    seed: int = 0
    output: Optional[str] = None
    geometry: Optional[GeometryBlock] = None
    geodesic: Optional[GeodesicBlock] = None
    dewitt: Optional[DewittBlock] = None
    density: Optional[DensityBlock] = None
    oracle: Optional[OracleBlock] = None
    compare: Optional[CompareBlock] = None
    hydrogen: Optional[HydrogenBlock] = None
    validate: bool = False
    raw: dict = field(default_factory=dict, repr=False, compare=False)

    def energies_for(self, block) -> list:
        e = getattr(block, "energies", None) if block is not None else None
        return [float(v) for v in (e if e is not None else self.energies)]

    def rng(self, salt: int = 0) -> np.random.Generator:
        return np.random.default_rng([self.seed, salt])

    def sample_admissible(self, E: float, n: int, box: float, salt: int, key: str) -> np.ndarray:
        """n points of [-box, box]^D with Omega^2 > DELTA_MIN (rejection, fixed seed)."""
        rng = self.rng(salt)
        D, M = self.dimension, self.potential.mass
        out = []
        for _ in range(1000 * n):
            x = rng.uniform(-box, box, D)
            if 2 * M * (evaluate(self.potential, x).V - E) > DELTA_MIN:
                out.append(x)
                if len(out) == n:
                    return np.array(out)
        raise ConfigError(key, f"cannot find {n} points with V > E = {E:g} inside [-{box:g}, {box:g}]^{D}")


_BLOCKS = {
    "geometry": GeometryBlock,
    "geodesic": GeodesicBlock,
    "dewitt": DewittBlock,
    "density": DensityBlock,
    "oracle": OracleBlock,
    "compare": CompareBlock,
    "hydrogen": HydrogenBlock,
}


def _path(parts) -> str:
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out


def _check_dim(vec, D, key):
    if len(vec) != D:
        raise ConfigError(key, f"expected {D} components, got {len(vec)}")


def _check_points(sc: Scenario, pts, key, need_forbidden: bool, energies=()):
    for i, x in enumerate(pts):
        _check_dim(x, sc.dimension, f"{key}[{i}]")
        try:
            V = evaluate(sc.potential, np.asarray(x, dtype=float)).V
        except EvaluationError as exc:
            raise ConfigError(f"{key}[{i}]", str(exc)) from None
        if need_forbidden:
            for E in energies:
                if not 2 * sc.potential.mass * (V - E) > DELTA_MIN:
                    raise ConfigError(f"{key}[{i}]", f"Omega^2 = 2M(V - E) <= {DELTA_MIN:g} at E = {E:g}")


def _preconditions(sc: Scenario) -> None:
    D = sc.dimension
    if sc.geometry and sc.geometry.points is not None:
        _check_points(sc, sc.geometry.points, "geometry.points", True, sc.energies_for(sc.geometry))
    if sc.dewitt:
        if sc.dewitt.points is not None:
            _check_points(sc, sc.dewitt.points, "dewitt.points", True, sc.energies_for(sc.dewitt))
        if sc.dewitt.xi is None and D == 1:
            raise ConfigError("dewitt.xi", "conformal coupling is undefined for D = 1; list xi values explicitly")
    if sc.geodesic:
        g = sc.geodesic
        _check_dim(g.x0, D, "geodesic.x0")
        _check_dim(g.v0, D, "geodesic.v0")
        if not any(g.v0):
            raise ConfigError("geodesic.v0", "initial velocity must be nonzero")
        _check_points(sc, [g.x0], "geodesic.x0", False)
    if sc.density:
        d = sc.density
        if (d.points is None) == (d.grid is None):
            raise ConfigError("density", "give exactly one of 'points' or 'grid'")
        if d.points is not None:
            _check_points(sc, d.points, "density.points", False)
        else:
            for k in ("lo", "hi", "n"):
                _check_dim(d.grid[k], D, f"density.grid.{k}")
            if any(a > b for a, b in zip(d.grid["lo"], d.grid["hi"])):
                raise ConfigError("density.grid", "lo must not exceed hi")
    if sc.oracle or sc.compare:
        if sc.oracle is None:
            raise ConfigError("compare", "needs an 'oracle' block for the spectral grid")
        o = sc.oracle
        if D != 1:
            raise ConfigError("dimension", "the spectral oracle is one-dimensional")
        if not o.x_max > o.x_min:
            raise ConfigError("oracle.x_max", "must exceed x_min")
        if o.n_states > o.n_grid:
            raise ConfigError("oracle.n_states", "cannot exceed n_grid")
        if o.tolerance is not None and sc.potential.family != "harmonic":
            raise ConfigError("oracle.tolerance", "eigenvalue tolerance needs the closed-form harmonic spectrum")


def parse(data: dict) -> Scenario:
    """Validate a decoded scenario mapping and build the Scenario."""
    try:
        jsonschema.validate(data, SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(_path(exc.absolute_path), exc.message) from None
    D = data["dimension"]
    try:
        pot = from_spec(data["potential"], D)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError("potential", str(exc)) from None
    if pot.dim != D:
        raise ConfigError("potential", f"tabulated potential has dimension {pot.dim}, scenario says {D}")
    blocks = {k: cls(**data[k]) for k, cls in _BLOCKS.items() if k in data}
    sc = Scenario(
        name=data["name"],
        potential=pot,
        dimension=D,
        energies=[float(e) for e in data["energies"]],
        seed=data.get("seed", 0),
        output=data.get("output"),
        validate="validate" in data,
        raw=data,
        **blocks,
    )
    _preconditions(sc)
    return sc


def load(path) -> Scenario:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError("", f"scenario file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"{path}: invalid JSON ({exc})") from None
    return parse(data)


def default_path() -> Path:
    return Path(__file__).with_name("scenarios") / "default.json"
