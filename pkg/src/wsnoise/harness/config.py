"""Flat ``key = value`` run files.

Blank lines and anything after ``#`` are ignored. Every key has a typed
default, so an empty file is a complete run description; unknown keys and bad
values are rejected with the offending line number.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from typing import Any, Iterable

ENGINES = ("full", "lz", "quasistatic")
CUTS = ("constant_variance", "constant_omega0")
AXIS_NAMES = ("omega0", "temperature", "v0", "beta", "none")
SCALES = ("linear", "log")
UNITS = ("bloch", "absolute")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    engine: str = "full"
    # lattice
    v0: float = 0.125
    f0: float = 0.00762
    alpha: float = 1.0
    phi0: float = 0.0
    # noise
    gamma: float = 0.00762
    omega0: float = 1.0
    temperature: float = 0.0
    variance: float = 0.5
    # ensemble and execution
    realizations: int = 20
    seed: int = 0
    threads: int = 1
    # full propagation
    steps_per_period: int = 4096
    grid_points: int = 0
    min_cells: int = 32
    g: float = 0.0
    trap_omega: float = 0.01
    periods: float = 1.0
    rate_periods: int = 0
    # two-level model
    lz_steps_per_period: int = 8192
    lz_half_window: float = 0.5
    # quasistatic
    beta_min: float = -3.0
    beta_max: float = 3.0
    beta_points: int = 201
    # sweeps and cuts
    cut: str = "constant_variance"
    axis1_name: str = "omega0"
    axis1_scale: str = "log"
    axis1_min: float = 0.01
    axis1_max: float = 100.0
    axis1_points: int = 8
    axis1_units: str = "bloch"
    axis2_name: str = "temperature"
    axis2_scale: str = "log"
    axis2_min: float = 0.01
    axis2_max: float = 1e4
    axis2_points: int = 8
    axis2_units: str = "bloch"
    # noise diagnostics
    noise_paths: int = 20
    noise_samples: int = 10000
    noise_dt: float = 0.01

    def validate(self) -> "RunConfig":
        _choice("engine", self.engine, ENGINES)
        _choice("cut", self.cut, CUTS)
        for k in ("1", "2"):
            _choice(f"axis{k}_name", getattr(self, f"axis{k}_name"), AXIS_NAMES)
            _choice(f"axis{k}_scale", getattr(self, f"axis{k}_scale"), SCALES)
            _choice(f"axis{k}_units", getattr(self, f"axis{k}_units"), UNITS)
        positive = ("f0", "variance", "lz_half_window", "noise_dt", "periods")
        for name in positive:
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        for name in ("v0", "gamma", "omega0", "temperature", "g", "trap_omega"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        for name in ("realizations", "threads", "steps_per_period", "lz_steps_per_period", "noise_paths"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1")
        if self.beta_min >= self.beta_max:
            raise ConfigError("beta_min must be below beta_max")
        return self

    def override(self, **changes: Any) -> "RunConfig":
        """Copy with the non-None entries of ``changes`` applied (CLI flags)."""
        given = {k: v for k, v in changes.items() if v is not None}
        unknown = set(given) - {f.name for f in fields(self)}
        if unknown:
            raise ConfigError(f"unknown key(s) {sorted(unknown)}")
        return replace(self, **given).validate()

    def to_text(self) -> str:
        return "".join(f"{f.name} = {getattr(self, f.name)!r}\n".replace("'", "") for f in fields(self))


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _choice(name, value, allowed) -> None:
    if value not in allowed:
        raise ConfigError(f"{name} must be one of {', '.join(allowed)}, got {value!r}")


def _convert(key: str, raw: str, lineno: int):
    kind = _TYPES[key]
    try:
        if kind == "int":
            value = float(raw)
            if not value.is_integer():
                raise ValueError
            return int(value)
        if kind == "float":
            value = float(raw)
            if not math.isfinite(value):
                raise ValueError
            return value
        return raw
    except ValueError:
        raise ConfigError(f"line {lineno}: cannot parse {key} = {raw!r} as {kind}") from None


def parse_config(text: str, required: Iterable[str] = ()) -> RunConfig:
    """Parse a run file; missing keys take their defaults unless listed in ``required``."""
    values: dict[str, Any] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        key, sep, raw = body.partition("=")
        key, raw = key.strip(), raw.strip()
        if not sep or not key:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line.strip()!r}")
        if key not in _TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if not raw:
            raise ConfigError(f"line {lineno}: missing value for {key!r}")
        values[key] = _convert(key, raw, lineno)
    missing = [k for k in required if k not in values]
    if missing:
        raise ConfigError(f"missing required key(s): {', '.join(missing)}")
    try:
        return RunConfig(**values).validate()
    except ConfigError as exc:
        raise ConfigError(f"invalid configuration: {exc}") from None


def load_config(path, required: Iterable[str] = ()) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), required)
