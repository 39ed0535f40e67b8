"""Run configuration: defaults, file loading, overrides and validation.

Configuration files use the key-value language of ``lexer``/``parser``
(or JSON, flattened to dotted keys).  ``--set key=value`` overrides are
parsed with the same grammar and applied after the file.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping

from .diagnostics import FRONT_THRESHOLD, JUMP_THRESHOLD
from .lexer import LexError
from .model import ModelParams
from .parser import ParseError, parse, to_python
from .pde_radial import GradientClosure
from .schemes import DEFAULT_CFL, PRESSURE_STEP

logger = logging.getLogger(__name__)

COMMANDS = ("analytic", "profile", "relation", "sim1d", "simradial", "compare", "sweep")
SWEEPABLE_COMMANDS = ("analytic", "sim1d", "simradial")


class ConfigError(Exception):
    def __init__(self, message: str, key: str | None = None) -> None:
        super().__init__(message)
        self.key = key


# key -> (type, default); None means "unset"
SCHEMA: dict[str, tuple[type, Any]] = {
    "model.c_s": (float, 1.0),
    "model.c_z": (float, 0.2),
    "model.c_p": (float, 1.0),
    "model.c_nu": (float, 50.0),
    "model.eta": (float, 1e-3),
    "geometry.dim": (int, 1),
    "geometry.r0": (float, 1.5),
    "geometry.r1_0": (float, None),
    "grid.x_max": (float, 12.0),
    "grid.l_r": (float, 8.0),
    "grid.n": (int, 960),
    "time.t_end": (float, 1.0),
    "time.dt": (float, None),
    "time.cfl": (float, None),
    "time.dt_max": (float, 0.01),
    "time.pressure_step": (float, PRESSURE_STEP),
    "output.directory": (str, "out"),
    "output.snapshot_stride": (int, 100),
    "output.diagnostics_stride": (int, 10),
    "relation.r_min": (float, 0.5),
    "relation.r_max": (float, 3.0),
    "relation.count": (int, 26),
    "profile.r": (float, None),
    "profile.r1": (float, None),
    "profile.extent": (float, 3.0),
    "profile.points": (int, 601),
    "front.threshold": (float, FRONT_THRESHOLD),
    "front.jump_threshold": (float, JUMP_THRESHOLD),
    "front.median3": (bool, False),
    "radial.gradient_closure": (str, GradientClosure.VERBATIM.value),
    "scheme.gated_predictor": (bool, True),
    "sweep.command": (str, "sim1d"),
    "sweep.parameter": (str, None),
    "sweep.values": (list, None),
    "analytic.dt": (float, 0.01),
}


def _coerce(key: str, value: Any) -> Any:
    kind, _ = SCHEMA[key]
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key} must be a number, got {value!r}", key)
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or value != int(value):
            raise ConfigError(f"{key} must be an integer, got {value!r}", key)
        return int(value)
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{key} must be true or false, got {value!r}", key)
        return value
    if kind is str:
        if not isinstance(value, str):
            raise ConfigError(f"{key} must be a string, got {value!r}", key)
        return value
    if not isinstance(value, list):
        raise ConfigError(f"{key} must be a list, got {value!r}", key)
    return value


# ---------------------------------------------------------------------------
# Sources
# ---------------------------------------------------------------------------


def _flatten(obj: Mapping[str, Any], prefix: str = "") -> dict[str, Any]:
    flat: dict[str, Any] = {}
    for name, value in obj.items():
        key = f"{prefix}{name}"
        if isinstance(value, Mapping):
            flat.update(_flatten(value, key + "."))
        else:
            flat[key] = value
    return flat


def parse_text(source: str) -> dict[str, Any]:
    """Assignments of a configuration text; later assignments win."""
    return {a.key: to_python(a.value) for a in parse(source)}


def load_file(path: str | Path) -> dict[str, Any]:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be an object")
        return _flatten(data)
    return parse_text(text)


def parse_override(item: str) -> tuple[str, Any]:
    """``key=value`` from the command line."""
    if "=" not in item:
        raise ConfigError(f"override {item!r} is not of the form key=value")
    try:
        ((key, value),) = parse_text(item).items()
    except (LexError, ParseError) as exc:
        raise ConfigError(f"override {item!r}: {exc}") from exc
    return key, value


# ---------------------------------------------------------------------------
# Typed configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Geometry:
    dim: int
    r0: float
    r1_0: float | None


@dataclass(frozen=True)
class GridSpec:
    x_max: float
    l_r: float
    n: int


@dataclass(frozen=True)
class TimeSpec:
    t_end: float
    dt: float | None
    cfl: float
    dt_max: float
    pressure_step: float


@dataclass(frozen=True)
class OutputSpec:
    directory: Path
    snapshot_stride: int
    diagnostics_stride: int


@dataclass(frozen=True)
class FrontSpec:
    threshold: float
    jump_threshold: float
    median3: bool


@dataclass(frozen=True)
class SweepSpec:
    command: str
    parameter: str | None
    values: tuple[float, ...]


@dataclass(frozen=True)
class RunConfig:
    command: str
    params: ModelParams
    geometry: Geometry
    grid: GridSpec
    time: TimeSpec
    output: OutputSpec
    front: FrontSpec
    sweep: SweepSpec
    relation: tuple[float, float, int]
    profile: tuple[float | None, float | None, float, int]
    gradient_closure: GradientClosure
    analytic_dt: float
    gated_predictor: bool = True
    seed: int | None = None
    raw: Mapping[str, Any] = field(default_factory=dict, compare=False, repr=False)

    @classmethod
    def from_mapping(
        cls, command: str, values: Mapping[str, Any], seed: int | None = None
    ) -> "RunConfig":
        merged = resolve(values)
        cfg = cls._build(command, merged, seed)
        cfg.validate()
        return cfg

    @classmethod
    def _build(cls, command: str, v: Mapping[str, Any], seed: int | None) -> "RunConfig":
        try:
            params = ModelParams(
                c_s=v["model.c_s"], c_z=v["model.c_z"], c_p=v["model.c_p"],
                c_nu=v["model.c_nu"], eta=v["model.eta"],
            )
        except ValueError as exc:
            raise ConfigError(f"model parameters: {exc}", "model") from exc
        dt, cfl = v["time.dt"], v["time.cfl"]
        if dt is not None and cfl is not None:
            raise ConfigError("set exactly one of time.dt and time.cfl", "time.dt")
        try:
            closure = GradientClosure(v["radial.gradient_closure"])
        except ValueError as exc:
            raise ConfigError(
                f"radial.gradient_closure must be one of "
                f"{[c.value for c in GradientClosure]}, got {v['radial.gradient_closure']!r}",
                "radial.gradient_closure",
            ) from exc
        values = v["sweep.values"] or []
        return cls(
            command=command,
            params=params,
            geometry=Geometry(v["geometry.dim"], v["geometry.r0"], v["geometry.r1_0"]),
            grid=GridSpec(v["grid.x_max"], v["grid.l_r"], v["grid.n"]),
            time=TimeSpec(
                v["time.t_end"],
                dt,
                DEFAULT_CFL if cfl is None else cfl,
                v["time.dt_max"],
                v["time.pressure_step"],
            ),
            output=OutputSpec(
                Path(v["output.directory"]),
                v["output.snapshot_stride"],
                v["output.diagnostics_stride"],
            ),
            front=FrontSpec(v["front.threshold"], v["front.jump_threshold"], v["front.median3"]),
            sweep=SweepSpec(v["sweep.command"], v["sweep.parameter"], tuple(values)),
            relation=(v["relation.r_min"], v["relation.r_max"], v["relation.count"]),
            profile=(v["profile.r"], v["profile.r1"], v["profile.extent"], v["profile.points"]),
            gradient_closure=closure,
            analytic_dt=v["analytic.dt"],
            gated_predictor=v["scheme.gated_predictor"],
            seed=seed,
            raw=dict(v),
        )

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.geometry.dim not in (1, 2, 3):
            raise ConfigError(f"geometry.dim must be 1, 2 or 3, got {self.geometry.dim!r}", "geometry.dim")
        _positive("geometry.r0", self.geometry.r0)
        if self.geometry.r1_0 is not None and not 0 <= self.geometry.r1_0 <= self.geometry.r0:
            raise ConfigError("geometry.r1_0 must lie in [0, geometry.r0]", "geometry.r1_0")
        _positive("grid.x_max", self.grid.x_max)
        _positive("grid.l_r", self.grid.l_r)
        if self.grid.n < 3:
            raise ConfigError("grid.n must be at least 3", "grid.n")
        _positive("time.t_end", self.time.t_end)
        if self.time.dt is not None:
            _positive("time.dt", self.time.dt)
        _positive("time.cfl", self.time.cfl)
        _positive("time.dt_max", self.time.dt_max)
        _positive("time.pressure_step", self.time.pressure_step)
        _positive("analytic.dt", self.analytic_dt)
        for key, stride in (
            ("output.snapshot_stride", self.output.snapshot_stride),
            ("output.diagnostics_stride", self.output.diagnostics_stride),
        ):
            if stride < 1:
                raise ConfigError(f"{key} must be >= 1", key)
        r_min, r_max, count = self.relation
        _positive("relation.r_min", r_min)
        if r_max < r_min or count < 1:
            raise ConfigError("relation needs r_min <= r_max and count >= 1", "relation")
        _, _, extent, points = self.profile
        _positive("profile.extent", extent)
        if points < 2:
            raise ConfigError("profile.points must be at least 2", "profile.points")
        if self.command == "sweep":
            self._validate_sweep()

    def _validate_sweep(self) -> None:
        sweep = self.sweep
        if sweep.command not in SWEEPABLE_COMMANDS:
            raise ConfigError(
                f"sweep.command must be one of {SWEEPABLE_COMMANDS}, got {sweep.command!r}",
                "sweep.command",
            )
        if sweep.parameter not in SCHEMA or SCHEMA[sweep.parameter][0] not in (float, int):
            raise ConfigError(f"sweep.parameter {sweep.parameter!r} is not a numeric key", "sweep.parameter")
        if not sweep.values:
            raise ConfigError("sweep.values must be a non-empty list", "sweep.values")
        for value in sweep.values:
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value) or value <= 0:
                raise ConfigError(f"sweep value {value!r} must be finite and positive", "sweep.values")

    def with_values(self, command: str, overrides: Mapping[str, Any]) -> "RunConfig":
        """A new configuration with some keys replaced."""
        merged = dict(self.raw)
        merged.update(overrides)
        return RunConfig.from_mapping(command, merged, self.seed)


def _positive(key: str, value: float) -> None:
    if not (math.isfinite(value) and value > 0):
        raise ConfigError(f"{key} must be finite and > 0, got {value!r}", key)


def resolve(values: Mapping[str, Any]) -> dict[str, Any]:
    """Defaults overlaid with *values*; unknown keys are rejected."""
    merged = {key: default for key, (_, default) in SCHEMA.items()}
    for key, value in values.items():
        if key not in SCHEMA:
            raise ConfigError(f"unknown configuration key {key!r}", key)
        merged[key] = None if value is None else _coerce(key, value)
    return merged


def load(
    command: str,
    path: str | Path | None = None,
    overrides: Iterable[str] = (),
    out: str | None = None,
    seed: int | None = None,
) -> RunConfig:
    """File, then ``--set`` overrides, then ``--out``."""
    values: dict[str, Any] = {}
    if path is not None:
        try:
            values.update(load_file(path))
        except (LexError, ParseError, OSError) as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        logger.debug("loaded %d keys from %s", len(values), path)
    for item in overrides:
        key, value = parse_override(item)
        values[key] = value
    if out is not None:
        values["output.directory"] = out
    return RunConfig.from_mapping(command, values, seed)
