"""Survival of a Wannier-Stark ground band under a harmonically noise-driven second lattice."""
from .lz import LZRunSpec, effective_band_gap, integrate_lz, lz_formula, lz_scan, minimum_position
from .model import LatticeParams, UnitContext, bloch_scales, convert, potential
from .noise import NoiseParams, NoisePath, NoiseState, generate_path, path_moments, power_spectrum
from .propagator import (
    EvolutionConfig,
    SpatialGrid,
    SurvivalSeries,
    WaveFunction,
    evolve,
    prepare_ground_state,
    run_ensemble,
    survival_probability,
)
from .quasistatic import BetaSweep, beta_survival, beta_sweep, intertwined_interval, quasistatic_average
from .seeding import derive_seed

__version__ = "0.1.0"
