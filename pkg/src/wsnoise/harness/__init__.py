"""Configuration, sweeps and the command line interface."""
from .config import ConfigError, RunConfig, load_config, parse_config
from .sweep import (
    Axis,
    Cell,
    CutRow,
    SweepResult,
    SweepSpec,
    emit_csv,
    emit_cut_csv,
    read_csv,
    run_cut,
    run_grid_sweep,
)

__all__ = [
    "Axis",
    "Cell",
    "ConfigError",
    "CutRow",
    "RunConfig",
    "SweepResult",
    "SweepSpec",
    "emit_csv",
    "emit_cut_csv",
    "load_config",
    "parse_config",
    "read_csv",
    "run_cut",
    "run_grid_sweep",
]
