"""Two-level ("noisy Landau-Zener") reduction around the Brillouin-zone edge.

In the accelerated frame the lattice only couples momenta differing by an
integer. Keeping the two states that cross at the zone edge gives

    H(t) = 1/2 [[-F0 t,              V0 (1 + exp(i phi))],
                [V0 (1 + exp(-i phi)), F0 t              ]]

The system starts in the lower diabatic level at ``t_start = -T_B/2``. The
ground-band survival is the population transferred to the other diabatic
level, which is the lower one once ``t > 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy import signal

from ._kernels import lz_propagate
from .noise import NoiseParams, NoisePath, choose_noise_dt, generate_path
from .propagator import SurvivalSeries
from .seeding import derive_seed

DEFAULT_STEPS_PER_PERIOD = 2**13
NORM_TOLERANCE = 1e-6


class LZError(RuntimeError):
    pass


@dataclass(frozen=True)
class TwoLevelState:
    """Diabatic amplitudes; ``amp_ground`` is the level occupied at ``t_start``."""

    amp_ground: complex
    amp_excited: complex

    @property
    def norm(self) -> float:
        return abs(self.amp_ground) ** 2 + abs(self.amp_excited) ** 2


@dataclass(frozen=True)
class LZRunSpec:
    v0: float
    f0: float
    noise: NoiseParams
    t_start: float | None = None
    t_end: float | None = None
    dt: float | None = None
    n_realizations: int = 100
    tail_fraction: float = 0.1
    single_lattice: bool = False

    def __post_init__(self):
        if not self.f0 > 0:
            raise ValueError("f0 must be positive")
        if not 0 < self.tail_fraction <= 0.5:
            raise ValueError("tail_fraction must lie in (0, 0.5]")
        if self.start >= self.end:
            raise ValueError("t_start must precede t_end")

    @property
    def t_b(self) -> float:
        return 1.0 / self.f0

    @property
    def start(self) -> float:
        return -0.5 * self.t_b if self.t_start is None else self.t_start

    @property
    def end(self) -> float:
        return 0.5 * self.t_b if self.t_end is None else self.t_end

    @property
    def step(self) -> float:
        return self.t_b / DEFAULT_STEPS_PER_PERIOD if self.dt is None else self.dt

    @property
    def n_steps(self) -> int:
        return max(1, round((self.end - self.start) / self.step))

    def with_noise(self, noise: NoiseParams) -> "LZRunSpec":
        return replace(self, noise=noise)


def lz_hamiltonian(t: float, phi: float, v0: float, f0: float) -> np.ndarray:
    c = v0 * (1.0 + np.exp(1j * phi))
    return 0.5 * np.array([[-f0 * t, c], [np.conj(c), f0 * t]], dtype=complex)


def instantaneous_energies(t: float, phi: float, v0: float, f0: float) -> tuple[float, float]:
    half = 0.5 * math.sqrt((f0 * t) ** 2 + 2.0 * v0**2 * (math.cos(phi) + 1.0))
    return -half, half


def lz_step_matrix(t_mid: float, phi: float, v0: float, f0: float, dt: float) -> np.ndarray:
    """Reference ``exp(-i H dt)`` for one step, with H frozen at ``t_mid``."""
    h = lz_hamiltonian(t_mid, phi, v0, f0)
    w = math.sqrt(abs(h[0, 0]) ** 2 + abs(h[0, 1]) ** 2)
    if w == 0:
        return np.eye(2, dtype=complex)
    return math.cos(w * dt) * np.eye(2) - 1j * math.sin(w * dt) / w * h


def _couplings(spec: LZRunSpec, phases: np.ndarray) -> np.ndarray:
    if spec.single_lattice:
        return np.full(phases.shape, spec.v0 + 0j)
    return spec.v0 * (1.0 + np.exp(1j * phases))


def _midpoint_phases(spec: LZRunSpec, path: NoisePath) -> np.ndarray:
    t_mid = (np.arange(spec.n_steps) + 0.5) * spec.step
    return path.phase_at(t_mid)


def _start_level(spec: LZRunSpec) -> int:
    # level 1 has diagonal +F0 t / 2 and is the lower one before the crossing
    return 1 if spec.start < 0 else 0


def _run(spec: LZRunSpec, phases: np.ndarray) -> np.ndarray:
    phases = np.atleast_2d(phases)
    survival, worst = lz_propagate(spec.start, spec.step, spec.f0, _couplings(spec, phases), _start_level(spec))
    if worst > NORM_TOLERANCE:
        raise LZError(f"two-level norm drifted by {worst:.3g}")
    return survival


def integrate_lz(spec: LZRunSpec, path: NoisePath | None = None, phase: float | None = None) -> SurvivalSeries:
    """Survival after every step for one noise path (or a constant ``phase``).

    The path's own time axis starts at 0 and is mapped onto ``t_start``.
    """
    if (path is None) == (phase is None):
        raise ValueError("give exactly one of path or phase")
    if path is not None:
        if path.duration < (spec.end - spec.start) * (1 - 1e-12):
            raise LZError("noise path does not cover the integration window")
        phases = _midpoint_phases(spec, path)
    else:
        phases = np.full(spec.n_steps, float(phase))
    survival = _run(spec, phases)[0]
    times = spec.start + np.arange(spec.n_steps + 1) * spec.step
    return SurvivalSeries(times=times, p_sur=np.clip(survival, 0.0, 1.0))


def tail_average(series: SurvivalSeries, tail_fraction: float = 0.1) -> float:
    t = series.times
    cut = t[-1] - tail_fraction * (t[-1] - t[0])
    return float(np.mean(series.p_sur[t >= cut - 1e-12 * abs(t[-1])]))


def tail_spread(series: SurvivalSeries, tail_fraction: float = 0.1) -> float:
    """Peak-to-peak survival inside the tail window.

    A transition that has settled before the window leaves only the small
    Stueckelberg ripple; a spread comparable to the survival itself means
    the window is too short for the tail average to mean anything.
    """
    t = series.times
    cut = t[-1] - tail_fraction * (t[-1] - t[0])
    tail = series.p_sur[t >= cut - 1e-12 * abs(t[-1])]
    return float(tail.max() - tail.min())


def _tail_average_rows(spec: LZRunSpec, survival: np.ndarray) -> np.ndarray:
    times = spec.start + np.arange(spec.n_steps + 1) * spec.step
    cut = times[-1] - spec.tail_fraction * (times[-1] - times[0])
    keep = times >= cut - 1e-12 * abs(times[-1])
    return survival[:, keep].mean(axis=1)


def realization_tails(spec: LZRunSpec, master_seed: int) -> np.ndarray:
    """Tail-averaged survival of each of ``spec.n_realizations`` noise paths."""
    span = spec.end - spec.start
    if spec.noise.temperature == 0 or spec.single_lattice:
        phase = np.zeros((1, spec.n_steps))
        tails = _tail_average_rows(spec, _run(spec, phase))
        return np.repeat(tails, spec.n_realizations)
    dt = choose_noise_dt(spec.step, spec.noise.omega0)
    phases = np.empty((spec.n_realizations, spec.n_steps))
    for i in range(spec.n_realizations):
        path = generate_path(spec.noise, span, dt, derive_seed(master_seed, i))
        phases[i] = _midpoint_phases(spec, path)
    return _tail_average_rows(spec, _run(spec, phases))


def lz_survival_estimate(spec: LZRunSpec, master_seed: int) -> tuple[float, float]:
    """Ensemble mean of tail-averaged survival and the standard error of that mean."""
    if spec.n_realizations < 2:
        raise ValueError("need at least two realizations")
    tails = realization_tails(spec, master_seed)
    dev = tails - tails[0]
    std = float(np.std(dev, ddof=1)) / math.sqrt(len(tails))
    return float(np.mean(tails)), std


def lz_scan(
    spec: LZRunSpec,
    omega0s: Sequence[float],
    variance: float,
    master_seed: int,
) -> list[tuple[float, float, float]]:
    """Survival versus noise frequency at fixed phase variance (T = variance * omega0**2).

    Every scan point reuses ``master_seed``: the realizations at neighbouring
    frequencies share their white-noise input, which removes most of the
    point-to-point scatter without biasing any single point.
    """
    rows = []
    for w in omega0s:
        noise = NoiseParams(spec.noise.gamma, float(w), variance * float(w) ** 2)
        mean, std = lz_survival_estimate(spec.with_noise(noise), master_seed)
        rows.append((float(w), mean, std))
    return rows


def lz_formula(v0: float, f0: float) -> float:
    if not f0 > 0:
        raise ValueError("f0 must be positive")
    return 1.0 - math.exp(-math.pi * v0**2 / (2.0 * f0))


def effective_band_gap(v0: float, var_phi: float, n_samples: int, rng: np.random.Generator) -> tuple[float, float]:
    """Mean and spread of the instantaneous gap ``V0 sqrt(2 (cos phi + 1))``.

    ``phi`` is Gaussian with variance ``var_phi``. The returned spread is the
    standard deviation of the gap distribution, not of its mean.
    """
    if var_phi < 0:
        raise ValueError("var_phi must be non-negative")
    if var_phi == 0:
        return 2.0 * v0, 0.0
    phi = rng.normal(0.0, math.sqrt(var_phi), n_samples)
    gap = v0 * 2.0 * np.abs(np.cos(0.5 * phi))
    return float(gap.mean()), float(gap.std(ddof=1))


class NoMinimumError(LZError):
    pass


def minimum_position(curve: Sequence[tuple[float, float, float]], significance: float = 2.0) -> float:
    """Frequency of the first statistically significant local minimum.

    A local minimum qualifies when, on both sides, the curve climbs above it
    by more than ``significance`` times the combined standard error before
    dropping lower again (its topographic prominence). The position is then
    refined by a parabola through the minimum and its two neighbours.
    """
    arr = np.asarray(curve, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3 or len(arr) < 10:
        raise ValueError("curve must be >= 10 rows of (omega0, mean, std)")
    w, y, s = arr.T
    if np.any(np.diff(w) <= 0):
        raise ValueError("omega0 grid must be strictly increasing")
    idx, _ = signal.find_peaks(-y)
    if idx.size:
        _, left, right = signal.peak_prominences(-y, idx)
    for k, i in enumerate(idx):
        lo = y[left[k] : i + 1]
        hi = y[i : right[k] + 1]
        j_left = left[k] + int(np.argmax(lo))
        j_right = i + int(np.argmax(hi))
        need_l = significance * math.hypot(s[i], s[j_left])
        need_r = significance * math.hypot(s[i], s[j_right])
        if y[j_left] - y[i] > need_l and y[j_right] - y[i] > need_r:
            return _parabolic_vertex(w[i - 1 : i + 2], y[i - 1 : i + 2])
    raise NoMinimumError("no local minimum found")


def _parabolic_vertex(x: np.ndarray, y: np.ndarray) -> float:
    (x0, x1, x2), (y0, y1, y2) = x, y
    denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
    a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom
    b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom
    if a <= 0:
        return float(x1)
    return float(np.clip(-b / (2 * a), x0, x2))
