"""Quasistatic picture: the noisy phase replaced by a lattice moving at constant speed.

For slow noise the phase velocity mu is nearly constant over one Bloch
period, so each realization behaves like a second lattice sliding with
``phi(t) = phi0 + beta t``. The survival P(beta) of these deterministic runs
is averaged over the stationary distribution of mu, a Gaussian of
*variance* T (the noise "width" is read as the second moment <mu**2> = T).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import special

from .model import LatticeParams, bloch_scales
from .propagator import EvolutionConfig, SpatialGrid, propagate_batch

DEFAULT_BETA_GRID = np.linspace(-3.0, 3.0, 201)
MIN_SWEEP_POINTS = 41
COVERAGE_SIGMAS = 5.0


@dataclass(frozen=True, eq=False)
class BetaSweep:
    """Survival after one Bloch period versus lattice velocity beta."""

    betas: np.ndarray
    p_sur: np.ndarray
    params: LatticeParams | None = field(default=None)

    def __post_init__(self):
        b = np.asarray(self.betas, dtype=float)
        p = np.asarray(self.p_sur, dtype=float)
        object.__setattr__(self, "betas", b)
        object.__setattr__(self, "p_sur", p)
        if b.ndim != 1 or b.shape != p.shape:
            raise ValueError("betas and p_sur must be 1-D arrays of equal length")
        if b.size < 2 or np.any(np.diff(b) <= 0):
            raise ValueError("betas must be strictly increasing with at least two points")
        if np.any((p < 0) | (p > 1)):
            raise ValueError("p_sur values must lie in [0, 1]")

    def to_csv(self, destination) -> None:
        with open(destination, "w", encoding="utf-8", newline="") as fh:
            fh.write("beta,p_sur\n")
            for b, p in zip(self.betas, self.p_sur):
                fh.write(f"{b:.17g},{p:.17g}\n")


def _beta_phases(params: LatticeParams, betas: np.ndarray, config: EvolutionConfig):
    t_b = bloch_scales(params).t_b
    dt = config.step(params)
    n = round(t_b / dt)
    t_mid = (np.arange(n) + 0.5) * dt
    return params.phi0 + betas[:, None] * t_mid[None, :], n * dt


def _survival_at_tb(grid, params, config, betas) -> np.ndarray:
    betas = np.asarray(betas, dtype=float)
    phases, t_final = _beta_phases(params, betas, config)
    cfg = EvolutionConfig(
        dt=config.step(params),
        nonlinearity_g=config.nonlinearity_g,
        trap_omega=config.trap_omega,
        measure_times=[t_final],
        single_lattice=config.single_lattice,
        imaginary_dt=config.imaginary_dt,
        trap_center=config.trap_center,
    )
    initial = np.full(betas.size, params.phi0)
    _, values = propagate_batch(grid, params, cfg, initial, phases, t_final)
    return values[:, -1]


def beta_survival(
    params: LatticeParams,
    beta: float,
    grid: SpatialGrid | None = None,
    config: EvolutionConfig | None = None,
) -> float:
    """P_sur(T_B) for the deterministic phase ``phi0 + beta t``."""
    grid = grid or SpatialGrid.for_lattice(params)
    config = config or EvolutionConfig()
    return float(_survival_at_tb(grid, params, config, [beta])[0])


def beta_sweep(
    params: LatticeParams,
    beta_grid: Sequence[float] | None = None,
    grid: SpatialGrid | None = None,
    config: EvolutionConfig | None = None,
) -> BetaSweep:
    """:func:`beta_survival` on every grid point; all velocities advance as one batch.

    All runs start from the same ground state (prepared at ``phi0``), so the
    imaginary-time relaxation is done once.
    """
    betas = DEFAULT_BETA_GRID if beta_grid is None else np.asarray(beta_grid, dtype=float)
    if betas.size < MIN_SWEEP_POINTS:
        raise ValueError(f"beta grid needs at least {MIN_SWEEP_POINTS} points")
    grid = grid or SpatialGrid.for_lattice(params)
    config = config or EvolutionConfig()
    return BetaSweep(betas, _survival_at_tb(grid, params, config, betas), params)


def intertwined_interval(alpha: float) -> tuple[float, float]:
    """|beta| range in which the moving barrier pair interleaves the static one.

    The static lattice blocks at +-1/2, the moving one at +-alpha/2 + beta;
    they interleave for alpha/2 < |beta| < 1 + alpha/2.
    """
    if not 0 < alpha <= 2:
        raise ValueError(f"alpha must lie in (0, 2], got {alpha!r}")
    return 0.5 * alpha, 1.0 + 0.5 * alpha


def average_weights(betas: np.ndarray, temperature: float, tails: str = "boundary") -> np.ndarray:
    """Weights w with ``sum(w * P)`` equal to the Gaussian average of P.

    P is taken piecewise linear between grid points, and each segment is
    integrated exactly against the normal density of variance
    ``temperature``. Mass beyond the grid is assigned to the boundary values
    (``tails="boundary"``); with ``tails="error"`` a grid covering less than
    five standard deviations on either side is rejected instead.
    """
    b = np.asarray(betas, dtype=float)
    if temperature < 0 or not math.isfinite(temperature):
        raise ValueError("temperature must be finite and non-negative")
    if tails not in ("boundary", "error"):
        raise ValueError(f"unknown tails option {tails!r}")
    w = np.zeros(b.size)
    if temperature == 0:
        if not b[0] <= 0 <= b[-1]:
            if tails == "error":
                raise ValueError("beta grid does not contain 0")
            w[0 if b[0] > 0 else -1] = 1.0
            return w
        k = min(int(np.searchsorted(b, 0.0, side="right")) - 1, b.size - 2)
        frac = (0.0 - b[k]) / (b[k + 1] - b[k])
        w[k], w[k + 1] = 1.0 - frac, frac
        return w
    sigma = math.sqrt(temperature)
    if tails == "error" and (b[0] > -COVERAGE_SIGMAS * sigma or b[-1] < COVERAGE_SIGMAS * sigma):
        raise ValueError(
            f"beta grid [{b[0]:g}, {b[-1]:g}] does not cover +-{COVERAGE_SIGMAS:g} sqrt(T) = +-{COVERAGE_SIGMAS * sigma:g}"
        )
    # beyond 40 sigma the density and tail mass are zero in double precision
    z = np.clip(b / sigma, -40.0, 40.0)
    cdf = special.ndtr(z)
    pdf = np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
    m0 = np.diff(cdf)
    # integral of beta * N(beta) over each segment
    m1 = sigma * (pdf[:-1] - pdf[1:])
    h = np.diff(b)
    lo, hi = b[:-1], b[1:]
    w[:-1] += (hi * m0 - m1) / h
    w[1:] += (m1 - lo * m0) / h
    w[0] += cdf[0]
    w[-1] += 1.0 - cdf[-1]
    return w


def quasistatic_average(sweep: BetaSweep, temperature: float, tails: str = "boundary") -> float:
    """Gaussian average (variance ``temperature``) of the swept survival."""
    w = average_weights(sweep.betas, temperature, tails)
    value = float(np.dot(w, sweep.p_sur))
    return min(max(value, float(sweep.p_sur.min())), float(sweep.p_sur.max()))


def averaged_curve(sweep: BetaSweep, temperatures: Sequence[float], tails: str = "boundary") -> np.ndarray:
    return np.array([quasistatic_average(sweep, float(t), tails) for t in temperatures])


def write_averaged_curve(destination, temperatures: Sequence[float], values: Sequence[float]) -> None:
    with open(destination, "w", encoding="utf-8", newline="") as fh:
        fh.write("temperature,p_sur_avg\n")
        for t, v in zip(temperatures, values):
            fh.write(f"{t:.17g},{v:.17g}\n")
