"""Problem-instance configuration: JSON in, validated domain objects out.

Every parse failure raises ConfigError anchored to the offending field
(dotted path), so a bad config names its own problem.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .degree import ProblemInstance, SurfaceSpec
from .errors import ConfigError
from .matrix import InteractionMatrix
from .spectrum import SingularitySet

__all__ = ["InstanceConfig", "load_config"]

DEFAULT_RESOLUTION = 64
DEFAULT_SOLVER_TOL = 1e-8
DEFAULT_SOLVER_STEPS = 10


@dataclass(frozen=True)
class SolverSettings:
    resolution: int = DEFAULT_RESOLUTION
    tol: float = DEFAULT_SOLVER_TOL
    steps: int = DEFAULT_SOLVER_STEPS


@dataclass(frozen=True)
class InstanceConfig:
    """Validated configuration; optional sections are None when absent."""

    matrix: InteractionMatrix
    rho: np.ndarray | None
    surface: SurfaceSpec | None
    singularities: SingularitySet
    solver: SolverSettings
    exponent_cap: float | None
    critical_tol: float | None
    sigma: np.ndarray | None
    mu: float | None
    direction: np.ndarray | None

    def require_rho(self) -> np.ndarray:
        if self.rho is None:
            raise ConfigError("rho", "this command needs the mass vector")
        return self.rho

    def require_surface(self) -> SurfaceSpec:
        if self.surface is None:
            raise ConfigError("surface", "this command needs the topology")
        return self.surface

    def instance(self) -> ProblemInstance:
        try:
            return ProblemInstance(
                self.require_surface(),
                self.singularities,
                self.matrix,
                self.require_rho(),
            )
        except ValueError as exc:
            raise ConfigError("rho", str(exc)) from exc


def load_config(path: str | Path) -> InstanceConfig:
    """Parse and validate a JSON config file.

    Raises
    ------
    ConfigError
        On unreadable files, malformed JSON (with line anchor), or any
        field failing validation.
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read config: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}:{exc.lineno}:{exc.colno}", f"invalid JSON: {exc.msg}"
        ) from exc
    if not isinstance(raw, dict):
        raise ConfigError(str(path), "top-level config must be an object")
    known = {
        "matrix",
        "rho",
        "surface",
        "singularities",
        "solver",
        "caps",
        "sigma",
        "mu",
        "direction",
    }
    for key in raw:
        if key not in known:
            raise ConfigError(key, "unknown config field")
    matrix = _parse_matrix(raw)
    n = matrix.n
    return InstanceConfig(
        matrix=matrix,
        rho=_parse_vector(raw, "rho", n, required=False),
        surface=_parse_surface(raw),
        singularities=_parse_singularities(raw),
        solver=_parse_solver(raw),
        exponent_cap=_parse_cap(raw, "exponent_cap"),
        critical_tol=_parse_cap(raw, "tolerance"),
        sigma=_parse_vector(raw, "sigma", n, required=False),
        mu=_parse_mu(raw),
        direction=_parse_vector(raw, "direction", n, required=False),
    )


def _parse_matrix(raw: dict) -> InteractionMatrix:
    if "matrix" not in raw:
        raise ConfigError("matrix", "missing required field")
    rows = raw["matrix"]
    if not isinstance(rows, list) or not rows:
        raise ConfigError("matrix", "expected a nonempty list of rows")
    for i, row in enumerate(rows):
        if not isinstance(row, list):
            raise ConfigError(f"matrix[{i}]", "expected a list of numbers")
        for j, x in enumerate(row):
            _require_number(x, f"matrix[{i}][{j}]")
    try:
        return InteractionMatrix(rows)
    except ValueError as exc:
        raise ConfigError("matrix", str(exc)) from exc


def _parse_vector(
    raw: dict, field: str, n: int, required: bool
) -> np.ndarray | None:
    if field not in raw:
        if required:
            raise ConfigError(field, "missing required field")
        return None
    items = raw[field]
    if not isinstance(items, list):
        raise ConfigError(field, "expected a list of numbers")
    if len(items) != n:
        raise ConfigError(
            field, f"expected {n} entries to match the matrix, got {len(items)}"
        )
    for i, x in enumerate(items):
        _require_number(x, f"{field}[{i}]")
    return np.array(items, dtype=np.float64)


def _parse_surface(raw: dict) -> SurfaceSpec | None:
    if "surface" not in raw:
        return None
    s = raw["surface"]
    if not isinstance(s, dict):
        raise ConfigError("surface", "expected an object")
    if "chi" in s:
        _require_int(s["chi"], "surface.chi")
        extra = set(s) - {"chi"}
        if extra:
            raise ConfigError("surface", f"unexpected fields {sorted(extra)}")
        return SurfaceSpec.from_chi(int(s["chi"]))
    kind = s.get("type")
    if kind == "closed":
        _require_int(s.get("genus"), "surface.genus")
        if int(s["genus"]) < 0:
            raise ConfigError("surface.genus", "must be nonnegative")
        return SurfaceSpec.closed_surface(int(s["genus"]))
    if kind == "domain":
        _require_int(s.get("holes"), "surface.holes")
        if int(s["holes"]) < 0:
            raise ConfigError("surface.holes", "must be nonnegative")
        return SurfaceSpec.planar_domain(int(s["holes"]))
    raise ConfigError(
        "surface.type", 'expected "closed" or "domain" (or a raw "chi")'
    )


def _parse_singularities(raw: dict) -> SingularitySet:
    if "singularities" not in raw:
        return SingularitySet.empty()
    items = raw["singularities"]
    if not isinstance(items, list):
        raise ConfigError("singularities", "expected a list")
    gammas: list[float] = []
    positions: list[tuple[float, float]] = []
    with_position = 0
    for l, item in enumerate(items):
        if not isinstance(item, dict) or "gamma" not in item:
            raise ConfigError(
                f"singularities[{l}]", 'expected an object with "gamma"'
            )
        _require_number(item["gamma"], f"singularities[{l}].gamma")
        gammas.append(float(item["gamma"]))
        if "position" in item:
            pos = item["position"]
            if (
                not isinstance(pos, list)
                or len(pos) != 2
                or not all(isinstance(x, (int, float)) for x in pos)
            ):
                raise ConfigError(
                    f"singularities[{l}].position", "expected [x, y]"
                )
            positions.append((float(pos[0]), float(pos[1])))
            with_position += 1
    if with_position and with_position != len(items):
        raise ConfigError(
            "singularities", "either all sources have positions or none do"
        )
    try:
        return SingularitySet(
            tuple(gammas), tuple(positions) if with_position else None
        )
    except ValueError as exc:
        raise ConfigError("singularities", str(exc)) from exc


def _parse_solver(raw: dict) -> SolverSettings:
    if "solver" not in raw:
        return SolverSettings()
    s = raw["solver"]
    if not isinstance(s, dict):
        raise ConfigError("solver", "expected an object")
    extra = set(s) - {"resolution", "tol", "steps"}
    if extra:
        raise ConfigError("solver", f"unexpected fields {sorted(extra)}")
    resolution = s.get("resolution", DEFAULT_RESOLUTION)
    _require_int(resolution, "solver.resolution")
    if int(resolution) <= 0 or int(resolution) % 2:
        raise ConfigError("solver.resolution", "must be a positive even integer")
    tol = s.get("tol", DEFAULT_SOLVER_TOL)
    _require_number(tol, "solver.tol")
    if float(tol) <= 0:
        raise ConfigError("solver.tol", "must be positive")
    steps = s.get("steps", DEFAULT_SOLVER_STEPS)
    _require_int(steps, "solver.steps")
    if int(steps) < 1:
        raise ConfigError("solver.steps", "must be at least 1")
    return SolverSettings(int(resolution), float(tol), int(steps))


def _parse_cap(raw: dict, key: str) -> float | None:
    if "caps" not in raw:
        return None
    caps = raw["caps"]
    if not isinstance(caps, dict):
        raise ConfigError("caps", "expected an object")
    extra = set(caps) - {"exponent_cap", "tolerance"}
    if extra:
        raise ConfigError("caps", f"unexpected fields {sorted(extra)}")
    if key not in caps:
        return None
    _require_number(caps[key], f"caps.{key}")
    value = float(caps[key])
    if value <= 0:
        raise ConfigError(f"caps.{key}", "must be positive")
    return value


def _parse_mu(raw: dict):
    if "mu" not in raw:
        return None
    _require_number(raw["mu"], "mu")
    if float(raw["mu"]) <= 0:
        raise ConfigError("mu", "must be positive")
    return float(raw["mu"])


def _require_number(value, field: str) -> None:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(field, f"expected a number, got {value!r}")


def _require_int(value, field: str) -> None:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(field, f"expected an integer, got {value!r}")
