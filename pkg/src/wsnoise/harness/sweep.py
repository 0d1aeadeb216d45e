"""Grid sweeps, 1-D cuts and their CSV output.

Every cell is a pure function of (resolved parameters, seed), with the seed
derived from the master seed and the cell's axis indices, so results do not
depend on worker count or scheduling. A failing cell is recorded with its
error message and does not stop the sweep.
"""
from __future__ import annotations

import csv
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..lz import LZRunSpec, lz_survival_estimate, minimum_position
from ..model import LatticeParams, bloch_scales
from ..noise import NoiseParams
from ..propagator import (
    EvolutionConfig,
    SpatialGrid,
    SurvivalSeries,
    long_time_survival_rate,
    propagate_batch,
    run_ensemble,
)
from ..quasistatic import BetaSweep, beta_survival, beta_sweep, quasistatic_average
from ..seeding import derive_seed
from .config import ConfigError, RunConfig

log = logging.getLogger(__name__)

GRID_COLUMNS = ("omega0", "temperature", "gamma", "v0", "f0", "alpha", "seed", "n_real", "p_sur_mean", "p_sur_std")
CUT_COLUMNS = (
    "omega0",
    "omega0_over_omega_b",
    "temperature",
    "temperature_over_omega_b2",
    "p_sur_mean",
    "p_sur_std",
    "rate",
)


@dataclass(frozen=True)
class Axis:
    name: str
    scale: str = "linear"
    min: float = 0.0
    max: float = 1.0
    points: int = 2
    units: str = "absolute"

    def __post_init__(self):
        if self.name not in ("omega0", "temperature", "v0", "beta"):
            raise ConfigError(f"cannot sweep {self.name!r}")
        if self.scale not in ("linear", "log"):
            raise ConfigError(f"unknown axis scale {self.scale!r}")
        if self.scale == "log" and not (self.min > 0 and self.max > 0):
            raise ConfigError(f"log axis {self.name} needs positive bounds")
        if self.points < 1 or (self.points == 1 and self.min != self.max):
            raise ConfigError(f"axis {self.name} needs >= 2 points (or 1 point with min == max)")

    def values(self, f0: float) -> np.ndarray:
        """Absolute axis values; ``units="bloch"`` scales omega0 by omega_B and T by omega_B**2."""
        space = np.geomspace if self.scale == "log" else np.linspace
        v = space(self.min, self.max, self.points)
        if self.units == "bloch" and self.name in ("omega0", "temperature"):
            w_b = 2 * math.pi * f0
            v = v * (w_b if self.name == "omega0" else w_b**2)
        return v


@dataclass(frozen=True)
class SweepSpec:
    axes: tuple[Axis, ...]
    base: RunConfig
    n_realizations: int
    master_seed: int
    engine: str

    def __post_init__(self):
        if not 1 <= len(self.axes) <= 2:
            raise ConfigError("a sweep has one or two axes")
        if len({a.name for a in self.axes}) != len(self.axes):
            raise ConfigError("axes must be distinct")
        if any(a.name == "beta" for a in self.axes) and self.engine != "full":
            raise ConfigError("a beta axis needs engine = full")

    @classmethod
    def from_config(cls, cfg: RunConfig) -> "SweepSpec":
        axes = []
        for k in ("1", "2"):
            name = getattr(cfg, f"axis{k}_name")
            if name == "none":
                continue
            axes.append(
                Axis(
                    name,
                    getattr(cfg, f"axis{k}_scale"),
                    getattr(cfg, f"axis{k}_min"),
                    getattr(cfg, f"axis{k}_max"),
                    getattr(cfg, f"axis{k}_points"),
                    getattr(cfg, f"axis{k}_units"),
                )
            )
        return cls(tuple(axes), cfg, cfg.realizations, cfg.seed, cfg.engine)


@dataclass
class Cell:
    index: tuple[int, ...]
    config: RunConfig
    seed: int
    p_sur_mean: float = math.nan
    p_sur_std: float = math.nan
    n_realizations: int = 0
    wall_time: float = 0.0
    error: str | None = None
    beta: float | None = None


@dataclass
class SweepResult:
    cells: list[Cell] = field(default_factory=list)
    axes: tuple[Axis, ...] = ()

    @property
    def failed(self) -> list[Cell]:
        return [c for c in self.cells if c.error is not None]


# ---------------------------------------------------------------- engines


def _lattice(cfg: RunConfig) -> LatticeParams:
    return LatticeParams(cfg.v0, cfg.f0, cfg.alpha, cfg.phi0)


def _grid(cfg: RunConfig, params: LatticeParams, periods: float = 1.0) -> SpatialGrid:
    return SpatialGrid.for_lattice(params, cfg.grid_points or None, cfg.min_cells, periods)


def _evolution(cfg: RunConfig, params: LatticeParams, measure_times=None) -> EvolutionConfig:
    t_b = bloch_scales(params).t_b
    return EvolutionConfig(
        dt=t_b / cfg.steps_per_period,
        nonlinearity_g=cfg.g,
        trap_omega=cfg.trap_omega,
        measure_times=measure_times,
    )


def full_survival(cfg: RunConfig, seed: int, periods: float = 1.0):
    """Ensemble survival series of the full system over ``periods`` Bloch periods."""
    params = _lattice(cfg)
    t_b = bloch_scales(params).t_b
    grid = _grid(cfg, params, periods)
    config = _evolution(cfg, params)
    if cfg.temperature == 0:
        n = round(periods * cfg.steps_per_period)
        phases = np.full((1, n), cfg.phi0)
        times, values = propagate_batch(grid, params, config, np.array([cfg.phi0]), phases, n * config.step(params))
        return times, values[0], np.zeros_like(values[0]), 1
    noise = NoiseParams(cfg.gamma, cfg.omega0, cfg.temperature)
    series = run_ensemble(params, noise, grid, config, cfg.realizations, seed, periods * t_b)
    return series.times, series.p_sur, series.ensemble_std, cfg.realizations


def lz_spec(cfg: RunConfig) -> LZRunSpec:
    if cfg.alpha != 1.0:
        raise ValueError("the two-level model needs alpha = 1")
    t_b = 1.0 / cfg.f0
    return LZRunSpec(
        v0=cfg.v0,
        f0=cfg.f0,
        noise=NoiseParams(cfg.gamma, cfg.omega0, cfg.temperature),
        t_start=-cfg.lz_half_window * t_b,
        t_end=cfg.lz_half_window * t_b,
        dt=t_b / cfg.lz_steps_per_period,
        n_realizations=cfg.realizations,
    )


_SWEEP_CACHE: dict[tuple, BetaSweep] = {}


def cached_beta_sweep(cfg: RunConfig) -> BetaSweep:
    key = (cfg.v0, cfg.f0, cfg.alpha, cfg.phi0, cfg.beta_min, cfg.beta_max, cfg.beta_points,
           cfg.steps_per_period, cfg.grid_points, cfg.min_cells, cfg.g, cfg.trap_omega)
    if key not in _SWEEP_CACHE:
        params = _lattice(cfg)
        betas = np.linspace(cfg.beta_min, cfg.beta_max, cfg.beta_points)
        _SWEEP_CACHE[key] = beta_sweep(params, betas, _grid(cfg, params), _evolution(cfg, params))
    return _SWEEP_CACHE[key]


def evaluate(cfg: RunConfig, seed: int, beta: float | None = None) -> tuple[float, float, int]:
    """(mean, standard error, realizations) of P_sur(T_B) for one fully resolved cell."""
    if beta is not None:
        params = _lattice(cfg)
        return beta_survival(params, beta, _grid(cfg, params), _evolution(cfg, params)), 0.0, 1
    if cfg.engine == "full":
        _, p, s, n = full_survival(cfg, seed)
        return float(p[-1]), float(s[-1]), n
    if cfg.engine == "lz":
        mean, std = lz_survival_estimate(lz_spec(cfg), seed)
        return mean, std, 1 if cfg.temperature == 0 else cfg.realizations
    if cfg.engine == "quasistatic":
        return quasistatic_average(cached_beta_sweep(cfg), cfg.temperature), 0.0, 1
    raise ConfigError(f"unknown engine {cfg.engine!r}")


def _run_cell(cell: Cell) -> Cell:
    start = time.perf_counter()
    try:
        cell.p_sur_mean, cell.p_sur_std, cell.n_realizations = evaluate(cell.config, cell.seed, cell.beta)
    except Exception as exc:  # errors are data: one bad cell must not end the sweep
        cell.error = f"{type(exc).__name__}: {exc}"
        log.warning("cell %s failed: %s", cell.index, cell.error)
    cell.wall_time = time.perf_counter() - start
    return cell


# ---------------------------------------------------------------- sweeps


def _cells(spec: SweepSpec) -> list[Cell]:
    f0 = spec.base.f0
    grids = [a.values(f0) for a in spec.axes]
    cells = []
    for index in np.ndindex(*[len(g) for g in grids]):
        changes, beta = {}, None
        for axis, g, i in zip(spec.axes, grids, index):
            if axis.name == "beta":
                beta = float(g[i])
            else:
                changes[axis.name] = float(g[i])
        cfg = spec.base.override(engine=spec.engine, realizations=spec.n_realizations, **changes)
        cells.append(Cell(tuple(int(i) for i in index), cfg, derive_seed(spec.master_seed, *index), beta=beta))
    return cells


def run_cells(cells: Sequence[Cell], threads: int = 1) -> list[Cell]:
    """Evaluate cells, in parallel processes when ``threads > 1``; order is preserved."""
    cells = list(cells)
    if threads <= 1 or len(cells) <= 1:
        return [_run_cell(c) for c in cells]
    # quasistatic cells share a cached beta sweep, so they stay in this process
    local = [c for c in cells if c.config.engine == "quasistatic" and c.beta is None]
    remote = [c for c in cells if not (c.config.engine == "quasistatic" and c.beta is None)]
    done = {id(c): _run_cell(c) for c in local}
    with ProcessPoolExecutor(max_workers=threads) as pool:
        for c, r in zip(remote, pool.map(_run_cell, remote)):
            done[id(c)] = r
    return [done[id(c)] for c in cells]


def run_grid_sweep(spec: SweepSpec, threads: int = 1) -> SweepResult:
    return SweepResult(run_cells(_cells(spec), threads), spec.axes)


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def emit_csv(result: SweepResult, destination) -> None:
    """Grid CSV with the columns of ``GRID_COLUMNS``; failed cells carry ``nan``."""
    with open(destination, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(GRID_COLUMNS)
        for c in result.cells:
            k = c.config
            writer.writerow(
                [
                    _fmt(k.omega0),
                    _fmt(k.temperature),
                    _fmt(k.gamma),
                    _fmt(k.v0),
                    _fmt(k.f0),
                    _fmt(k.alpha),
                    str(c.seed),
                    str(c.n_realizations),
                    _fmt(c.p_sur_mean),
                    _fmt(c.p_sur_std),
                ]
            )


def read_csv(source) -> list[dict[str, str]]:
    with open(source, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


# ---------------------------------------------------------------- cuts


@dataclass
class CutRow:
    omega0: float
    temperature: float
    p_sur_mean: float
    p_sur_std: float
    rate: float = math.nan
    error: str | None = None


def _cut_cell(args) -> CutRow:
    cfg, seed = args
    try:
        if cfg.engine == "full" and cfg.rate_periods > 0:
            params = _lattice(cfg)
            times, p, s, _ = full_survival(cfg, seed, cfg.rate_periods)
            t_b = bloch_scales(params).t_b
            i = int(np.argmin(np.abs(times - t_b)))
            try:
                rate = long_time_survival_rate(SurvivalSeries(times, p), t_b)
            except ValueError:
                rate = math.nan
            return CutRow(cfg.omega0, cfg.temperature, float(p[i]), float(s[i]), rate)
        mean, std, _ = evaluate(cfg, seed)
        return CutRow(cfg.omega0, cfg.temperature, mean, std)
    except Exception as exc:
        return CutRow(cfg.omega0, cfg.temperature, math.nan, math.nan, error=f"{type(exc).__name__}: {exc}")


def cut_configs(kind: str, cfg: RunConfig) -> list[RunConfig]:
    """Per-point configurations of a constant-variance or constant-omega0 cut.

    The cut axis is taken from the ``axis1_*`` keys; its name must be
    ``omega0`` for a constant-variance cut (T = variance * omega0**2) and
    ``temperature`` for a constant-omega0 cut.
    """
    expected = {"constant_variance": "omega0", "constant_omega0": "temperature"}
    if kind not in expected:
        raise ConfigError(f"unknown cut {kind!r}")
    if cfg.axis1_name != expected[kind]:
        raise ConfigError(f"a {kind} cut runs along {expected[kind]}; set axis1_name = {expected[kind]}")
    axis = Axis(cfg.axis1_name, cfg.axis1_scale, cfg.axis1_min, cfg.axis1_max, cfg.axis1_points, cfg.axis1_units)
    out = []
    for v in axis.values(cfg.f0):
        if kind == "constant_variance":
            out.append(cfg.override(omega0=float(v), temperature=cfg.variance * float(v) ** 2))
        else:
            out.append(cfg.override(temperature=float(v)))
    return out


def run_cut(kind: str, cfg: RunConfig, threads: int = 1) -> list[CutRow]:
    """1-D scan; point i uses seed ``derive_seed(cfg.seed, i)``."""
    jobs = [(c, derive_seed(cfg.seed, i)) for i, c in enumerate(cut_configs(kind, cfg))]
    if threads <= 1 or len(jobs) <= 1 or cfg.engine == "quasistatic":
        return [_cut_cell(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(_cut_cell, jobs))


def emit_cut_csv(rows: Sequence[CutRow], f0: float, destination) -> None:
    w_b = 2 * math.pi * f0
    with open(destination, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CUT_COLUMNS)
        for r in rows:
            writer.writerow(
                [_fmt(v) for v in (r.omega0, r.omega0 / w_b, r.temperature, r.temperature / w_b**2,
                                   r.p_sur_mean, r.p_sur_std, r.rate)]
            )


def cut_minimum(rows: Sequence[CutRow], key: str = "omega0", significance: float = 2.0) -> float:
    """First significant minimum of a cut along ``key`` (see :func:`wsnoise.lz.minimum_position`)."""
    curve = [(getattr(r, key), r.p_sur_mean, r.p_sur_std) for r in rows if r.error is None]
    return minimum_position(curve, significance)
