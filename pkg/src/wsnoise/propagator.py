"""Split-operator propagation of the tilted bichromatic lattice.

The wavefunction is stored in the accelerated frame, psi_lab = exp(i F0 x t) psi,
where the Stark force only enters the kinetic energy (p + F0 t)**2 / 2 and the
position grid stays exactly periodic. A gauge-frame momentum p corresponds to
lab momentum p + F0 t.

All engines work on a batch of wavefunctions (rows of a 2-D array) so that an
ensemble of noise realizations, or a sweep of lattice velocities, advances
through one shared FFT loop.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, Sequence, Union

import numpy as np
from scipy import fft as sfft

from .model import LatticeParams, bloch_scales, rational_alpha
from .noise import NoiseParams, NoisePath, choose_noise_dt, generate_path
from .seeding import derive_seed

log = logging.getLogger(__name__)

DEFAULT_STEPS_PER_PERIOD = 2**14
MAX_IMAGINARY_STEPS = 10**6
ENERGY_TOLERANCE = 1e-10
BATCH_ROWS = 32
# momentum head-room beyond the drift F0 t for the ground band and its Bragg orders
MOMENTUM_MARGIN = 4.0

PhaseSource = Union[NoisePath, Callable[[np.ndarray], np.ndarray], float]


class PropagationError(RuntimeError):
    pass


class NonStroboscopicWarning(UserWarning):
    pass


class MomentumRangeWarning(UserWarning):
    """The bound band drifts in gauge momentum by -F0 t and may wrap around the grid."""


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform periodic grid on ``[-L/2, L/2)`` with L a multiple of 2 pi."""

    length: float
    points: int

    def __post_init__(self):
        q = self.length / (2 * math.pi)
        if abs(q - round(q)) > 1e-9 * q or round(q) < 4:
            raise ValueError("box length must be 2 pi times an integer >= 4")
        if self.points < 2**9 or self.points & (self.points - 1):
            raise ValueError("points must be a power of two >= 512")

    @classmethod
    def for_lattice(
        cls, params: LatticeParams, points: int | None = None, min_cells: int = 32, periods: float = 1.0
    ) -> "SpatialGrid":
        """Smallest box holding ``min_cells`` unit cells that is commensurate with both lattices.

        ``points=None`` picks the smallest power of two >= 512 giving at
        least 16 points per cell and a momentum range that holds the band
        drift over ``periods`` Bloch periods.
        """
        b = rational_alpha(params.alpha).denominator
        m = max(1, math.ceil(min_cells / b))
        cells = b * m
        if points is None:
            # p_max = points / (2 cells) must exceed periods + margin
            need = max(16 * cells, math.ceil(2 * cells * (periods + MOMENTUM_MARGIN)))
            points = max(2**9, 1 << (need - 1).bit_length())
        return cls(length=2 * math.pi * cells, points=points)

    @property
    def p_max(self) -> float:
        return math.pi / self.spacing

    @property
    def cells(self) -> int:
        return round(self.length / (2 * math.pi))

    @property
    def spacing(self) -> float:
        return self.length / self.points

    @property
    def dp(self) -> float:
        return 2 * math.pi / self.length

    @cached_property
    def x(self) -> np.ndarray:
        return -0.5 * self.length + np.arange(self.points) * self.spacing

    @cached_property
    def p(self) -> np.ndarray:
        """Momenta in FFT order."""
        return 2 * math.pi * sfft.fftfreq(self.points, d=self.spacing)


@dataclass(eq=False)
class WaveFunction:
    """Gauge-frame amplitudes on ``grid`` at ``time``; normalised as sum |psi|^2 dx = 1."""

    grid: SpatialGrid
    amplitudes: np.ndarray
    time: float = 0.0

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2) * self.grid.spacing)

    def normalized(self) -> "WaveFunction":
        return WaveFunction(self.grid, self.amplitudes / math.sqrt(self.norm), self.time)

    def save(self, destination) -> None:
        """Write ``# x re(psi) im(psi)`` rows (gauge frame)."""
        with open(destination, "w", encoding="utf-8") as fh:
            fh.write("# x re(psi) im(psi)\n")
            for x, a in zip(self.grid.x, self.amplitudes):
                fh.write(f"{x:.17g} {a.real:.17g} {a.imag:.17g}\n")


@dataclass(frozen=True)
class EvolutionConfig:
    """Integration settings. ``dt=None`` resolves to T_B / 2**14."""

    dt: float | None = None
    nonlinearity_g: float = 0.0
    trap_omega: float = 0.01
    measure_times: Sequence[float] | None = None
    single_lattice: bool = False
    imaginary_dt: float = 0.1
    trap_center: float = 0.0

    def __post_init__(self):
        if self.dt is not None and not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.nonlinearity_g < 0 or self.trap_omega < 0:
            raise ValueError("nonlinearity_g and trap_omega must be non-negative")
        if self.measure_times is not None and list(self.measure_times) != sorted(self.measure_times):
            raise ValueError("measure_times must be sorted")

    def step(self, params: LatticeParams) -> float:
        if self.dt is not None:
            return self.dt
        return bloch_scales(params).t_b / DEFAULT_STEPS_PER_PERIOD


@dataclass
class SurvivalSeries:
    times: np.ndarray
    p_sur: np.ndarray
    ensemble_std: np.ndarray | None = None
    reference: float | None = field(default=None, repr=False)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.p_sur = np.asarray(self.p_sur, dtype=float)
        if self.ensemble_std is not None:
            self.ensemble_std = np.asarray(self.ensemble_std, dtype=float)

    def at(self, t: float) -> float:
        i = int(np.argmin(np.abs(self.times - t)))
        return float(self.p_sur[i])

    def to_csv(self, destination) -> None:
        std = self.ensemble_std if self.ensemble_std is not None else np.zeros_like(self.p_sur)
        with open(destination, "w", encoding="utf-8", newline="") as fh:
            fh.write("t,p_sur,std\n")
            for row in zip(self.times, self.p_sur, std):
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


class _Lattice:
    """Potential tables for one grid and parameter set, evaluated per row phase."""

    def __init__(self, grid: SpatialGrid, params: LatticeParams, single_lattice: bool = False):
        frac = rational_alpha(params.alpha)
        if (frac.numerator * grid.cells) % frac.denominator:
            raise ValueError(f"grid of {grid.cells} cells is not commensurate with alpha = {frac}")
        self.alpha = float(frac)
        self.v0 = params.v0
        self.second = not single_lattice
        x = grid.x
        self.cos_x = np.cos(x)
        self.cos_ax = np.cos(self.alpha * x)
        self.sin_ax = np.sin(self.alpha * x)

    def values(self, phases: np.ndarray) -> np.ndarray:
        """V(x, phi) for each phase in ``phases`` (shape (R,)); returns (R, N)."""
        phases = np.asarray(phases, dtype=float)
        if not self.second:
            return np.broadcast_to(self.v0 * self.cos_x, (phases.size, self.cos_x.size))
        c = np.cos(self.alpha * phases)[:, None]
        s = np.sin(self.alpha * phases)[:, None]
        return self.v0 * (self.cos_x + c * self.cos_ax + s * self.sin_ax)


def _energies(psi: np.ndarray, grid: SpatialGrid, v: np.ndarray, g: float) -> np.ndarray:
    dx = grid.spacing
    dens = np.abs(psi) ** 2
    norm = dens.sum(axis=-1) * dx
    pk = np.abs(sfft.fft(psi, axis=-1)) ** 2
    kinetic = (pk * (0.5 * grid.p**2)).sum(axis=-1) / pk.sum(axis=-1)
    pot = (dens * v).sum(axis=-1) * dx / norm
    inter = 0.5 * g * (dens**2).sum(axis=-1) * dx / norm**2
    return kinetic + pot + inter


def _ground_states(grid: SpatialGrid, params: LatticeParams, config: EvolutionConfig, phases: np.ndarray):
    """Imaginary-time relaxation of one state per phase; returns (psi rows, energies, steps)."""
    if not config.trap_omega > 0:
        raise ValueError("ground-state preparation needs trap_omega > 0")
    lattice = _Lattice(grid, params, config.single_lattice)
    x, dx, g = grid.x, grid.spacing, config.nonlinearity_g
    w = config.trap_omega
    v = lattice.values(phases) + 0.5 * w**2 * (x - config.trap_center) ** 2
    tau = config.imaginary_dt
    psi = np.tile(np.exp(-0.5 * w * (x - config.trap_center) ** 2).astype(complex), (len(phases), 1))
    psi /= np.sqrt((np.abs(psi) ** 2).sum(axis=-1, keepdims=True) * dx)
    kin = np.exp(-0.5 * grid.p**2 * tau)
    check_every = 10
    e_old = _energies(psi, grid, v, g)
    for n in range(1, MAX_IMAGINARY_STEPS + 1):
        if g:
            psi = psi * np.exp(-0.5 * tau * (v + g * np.abs(psi) ** 2))
            psi = sfft.ifft(kin * sfft.fft(psi, axis=-1), axis=-1)
            psi = psi * np.exp(-0.5 * tau * (v + g * np.abs(psi) ** 2))
        else:
            half = np.exp(-0.5 * tau * v)
            psi = half * sfft.ifft(kin * sfft.fft(half * psi, axis=-1), axis=-1)
        psi /= np.sqrt((np.abs(psi) ** 2).sum(axis=-1, keepdims=True) * dx)
        if n % check_every == 0:
            e = _energies(psi, grid, v, g)
            if np.all(np.abs(e - e_old) < ENERGY_TOLERANCE * check_every):
                return psi, e, n
            e_old = e
    raise PropagationError(f"imaginary-time relaxation did not converge in {MAX_IMAGINARY_STEPS} steps")


def prepare_ground_state(grid: SpatialGrid, params: LatticeParams, config: EvolutionConfig) -> WaveFunction:
    """Ground state of V(x, phi0) plus the harmonic preparation trap, by imaginary time."""
    psi, _, _ = _ground_states(grid, params, config, np.array([params.phi0]))
    return WaveFunction(grid, _fix_global_phase(psi[0]), 0.0)


def ground_state_energy(wf: WaveFunction, params: LatticeParams, config: EvolutionConfig) -> float:
    lattice = _Lattice(wf.grid, params, config.single_lattice)
    x = wf.grid.x
    v = lattice.values(np.array([params.phi0])) + 0.5 * config.trap_omega**2 * (x - config.trap_center) ** 2
    return float(_energies(wf.amplitudes[None, :], wf.grid, v, config.nonlinearity_g)[0])


def _fix_global_phase(psi: np.ndarray) -> np.ndarray:
    i = int(np.argmax(np.abs(psi)))
    return psi * (abs(psi[i]) / psi[i])


def _kinetic_phase(grid: SpatialGrid, f0: float, t_mid: float, dt: float) -> np.ndarray:
    return np.exp(-0.5j * (grid.p + f0 * t_mid) ** 2 * dt)


def split_step(
    wf: WaveFunction,
    t: float,
    dt: float,
    phi: float,
    params: LatticeParams,
    g: float = 0.0,
    single_lattice: bool = False,
) -> WaveFunction:
    """One Strang step from ``t`` to ``t + dt`` with the phase frozen at ``phi``."""
    lattice = _Lattice(wf.grid, params, single_lattice)
    v = lattice.values(np.array([phi]))[0]
    psi = wf.amplitudes * np.exp(-0.5j * dt * (v + g * np.abs(wf.amplitudes) ** 2))
    psi = sfft.ifft(_kinetic_phase(wf.grid, params.f0, t + 0.5 * dt, dt) * sfft.fft(psi))
    psi = psi * np.exp(-0.5j * dt * (v + g * np.abs(psi) ** 2))
    return WaveFunction(wf.grid, psi, t + dt)


def momentum_distribution(wf: WaveFunction) -> tuple[np.ndarray, np.ndarray]:
    """Gauge-frame momenta (ascending) and their probabilities, summing to one."""
    pk = np.abs(sfft.fft(wf.amplitudes)) ** 2
    order = np.argsort(wf.grid.p, kind="stable")
    return wf.grid.p[order], pk[order] / pk.sum()


def _window_weights(grid: SpatialGrid, lab_shift: float) -> np.ndarray:
    """1 inside lab momentum (-1/2, 1/2), 1/2 on a bin sitting exactly on an edge, 0 outside."""
    lab = np.abs(grid.p + lab_shift)
    tol = 1e-6 * grid.dp
    w = (lab < 0.5 - tol).astype(float)
    w[np.abs(lab - 0.5) <= tol] = 0.5
    return w


def _raw_windows(psi: np.ndarray, grid: SpatialGrid, f0: float, t: float) -> np.ndarray:
    pk = np.abs(sfft.fft(psi, axis=-1)) ** 2
    return (pk * _window_weights(grid, f0 * t)).sum(axis=-1) / pk.sum(axis=-1)


def survival_probability(wf: WaveFunction, t: float, params: LatticeParams, tolerance: float | None = None) -> float:
    """Probability of lab momentum in [-1/2, 1/2] at time ``t``.

    In the gauge frame this is the window [-1/2 - F0 t, 1/2 - F0 t]. Calls at
    times that are not multiples of the Bloch period are answered but warned
    about, since the band window is only meaningful stroboscopically.
    """
    if params.f0 > 0:
        t_b = 1.0 / params.f0
        tol = tolerance if tolerance is not None else 1e-6 * t_b
        if abs(t - t_b * round(t / t_b)) > tol:
            warnings.warn(f"survival measured at non-stroboscopic t = {t:g}", NonStroboscopicWarning, stacklevel=2)
    value = float(_raw_windows(wf.amplitudes[None, :], wf.grid, params.f0, t)[0])
    return min(max(value, 0.0), 1.0)


def _phase_rows(source, t: np.ndarray, params: LatticeParams) -> np.ndarray:
    """Phase at times ``t`` for one source; noise paths are offset by ``params.phi0``."""
    if isinstance(source, NoisePath):
        if t.size and t.max() > source.duration * (1 + 1e-12):
            raise PropagationError("noise path does not cover the evolution span")
        return params.phi0 + source.phase_at(t)
    if callable(source):
        return np.broadcast_to(np.asarray(source(t), dtype=float), t.shape).copy()
    return np.full(t.shape, float(source))


def _measure_steps(t0: float, t_final: float, dt: float, params: LatticeParams, times) -> list[int]:
    n_total = round((t_final - t0) / dt)
    if times is None:
        if params.f0 > 0:
            t_b = 1.0 / params.f0
            m_max = math.floor((t_final - t0) / t_b + 1e-9)
            times = [t0 + m * t_b for m in range(m_max + 1)]
        else:
            times = [t0]
        if abs(times[-1] - t_final) > 0.5 * dt:
            times.append(t_final)
    steps = []
    for t in times:
        if t < t0 - 1e-9 * dt or t > t_final + 1e-9 * max(dt, abs(t_final)):
            raise ValueError(f"measure time {t:g} outside [{t0:g}, {t_final:g}]")
        steps.append(min(n_total, max(0, round((t - t0) / dt))))
    return sorted(set(steps))


class _Engine:
    """Real-time propagation of a batch of rows with per-row phase samples."""

    def __init__(self, grid: SpatialGrid, params: LatticeParams, config: EvolutionConfig, force_nonlinear=False):
        self.grid = grid
        self.params = params
        self.g = config.nonlinearity_g
        self.nonlinear = force_nonlinear or self.g != 0
        self.lattice = _Lattice(grid, params, config.single_lattice)
        self.dt = config.step(params)

    def run(self, psi: np.ndarray, t0: float, phases: np.ndarray, measure_steps: Sequence[int]):
        """Advance ``psi`` (R, N) through ``phases.shape[1]`` steps.

        ``phases[:, n]`` is the phase at the midpoint of step n. Returns the
        final rows and the raw window weight at each requested step index.
        """
        psi = np.array(psi, dtype=complex, copy=True)
        n_total = phases.shape[1]
        windows = np.empty((psi.shape[0], len(measure_steps)))
        done = 0
        for k, stop in enumerate(measure_steps):
            if stop > done:
                advance = self._segment_nonlinear if self.nonlinear else self._segment_linear
                psi = advance(psi, t0, phases, done, stop)
                done = stop
            windows[:, k] = _raw_windows(psi, self.grid, self.params.f0, t0 + done * self.dt)
        if done < n_total:
            advance = self._segment_nonlinear if self.nonlinear else self._segment_linear
            psi = advance(psi, t0, phases, done, n_total)
        return psi, windows

    def _segment_linear(self, psi, t0, phases, n0, n1):
        dt, f0, grid = self.dt, self.params.f0, self.grid
        vdt = self.lattice.values(phases[:, n0]) * dt
        psi *= np.exp(-0.5j * vdt)
        for n in range(n0, n1):
            psi = sfft.ifft(_kinetic_phase(grid, f0, t0 + (n + 0.5) * dt, dt) * sfft.fft(psi, axis=-1), axis=-1)
            if n + 1 < n1:
                v_next = self.lattice.values(phases[:, n + 1]) * dt
                psi *= np.exp(-0.5j * (vdt + v_next))
                vdt = v_next
            else:
                psi *= np.exp(-0.5j * vdt)
        return psi

    def _segment_nonlinear(self, psi, t0, phases, n0, n1):
        dt, f0, grid, g = self.dt, self.params.f0, self.grid, self.g
        for n in range(n0, n1):
            v = self.lattice.values(phases[:, n])
            psi = psi * np.exp(-0.5j * dt * (v + g * np.abs(psi) ** 2))
            psi = sfft.ifft(_kinetic_phase(grid, f0, t0 + (n + 0.5) * dt, dt) * sfft.fft(psi, axis=-1), axis=-1)
            psi = psi * np.exp(-0.5j * dt * (v + g * np.abs(psi) ** 2))
        return psi


def _check_momentum_range(grid: SpatialGrid, f0: float, t_final: float) -> None:
    if f0 * t_final + MOMENTUM_MARGIN > grid.p_max:
        warnings.warn(
            f"band drift F0 t = {f0 * t_final:.3g} leaves less than {MOMENTUM_MARGIN:g} of the momentum range "
            f"p_max = {grid.p_max:.3g}; use more grid points",
            MomentumRangeWarning,
            stacklevel=3,
        )


def _normalized_survival(windows: np.ndarray) -> np.ndarray:
    """Window weight relative to the initial one, clipped into [0, 1]."""
    ref = windows[:, :1]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(ref > 0, windows / ref, 0.0)
    return np.clip(ratio, 0.0, 1.0)


def evolve(
    wf: WaveFunction,
    phi_of_t: PhaseSource,
    t_final: float,
    params: LatticeParams,
    config: EvolutionConfig,
    force_nonlinear: bool = False,
) -> tuple[WaveFunction, SurvivalSeries]:
    """Propagate ``wf`` from ``wf.time`` to ``t_final`` and record the survival.

    ``phi_of_t`` is a noise path (phase offset by ``params.phi0``), a
    vectorised callable returning the full phase, or a constant. The survival
    at each measurement time is the lab-frame window weight divided by the
    weight of the initial state, so a state that never leaves the ground band
    reads 1 even though its Bloch components outside the window are not
    counted.
    """
    engine = _Engine(wf.grid, params, config, force_nonlinear)
    dt = engine.dt
    t0 = wf.time
    n_total = round((t_final - t0) / dt)
    if n_total < 1:
        raise ValueError("t_final must lie at least one step after wf.time")
    _check_momentum_range(wf.grid, params.f0, t_final)
    t_mid = t0 + (np.arange(n_total) + 0.5) * dt
    phases = _phase_rows(phi_of_t, t_mid, params)[None, :]
    requested = _measure_steps(t0, t_final, dt, params, config.measure_times)
    steps = sorted(set([0] + requested))
    psi, windows = engine.run(wf.amplitudes[None, :], t0, phases, steps)
    keep = [steps.index(s) for s in requested]
    series = SurvivalSeries(
        times=t0 + np.array(requested) * dt,
        p_sur=_normalized_survival(windows)[0, keep],
        reference=float(windows[0, 0]),
    )
    return WaveFunction(wf.grid, psi[0], t0 + n_total * dt), series


def long_time_survival_rate(series: SurvivalSeries, t_b: float, t_min: float | None = None) -> float:
    """Geometric mean of P(t + T_B) / P(t) over stroboscopic t > ``t_min`` (default 5 T_B)."""
    t_min = 5 * t_b if t_min is None else t_min
    m = series.times / t_b
    strobe = np.abs(m - np.round(m)) < 1e-6
    times = series.times[strobe]
    values = series.p_sur[strobe]
    if times.size == 0 or times[-1] - times[0] < 10 * t_b * (1 - 1e-9):
        raise ValueError("series must be sampled stroboscopically over at least 10 Bloch periods")
    sel = times > t_min - 1e-9 * t_b
    vals = values[sel]
    if vals.size < 2:
        raise ValueError("fewer than two stroboscopic samples after t_min")
    if np.any(vals <= 0):
        raise ValueError("survival reached zero; rate undefined")
    ratios = vals[1:] / vals[:-1]
    return float(np.exp(np.mean(np.log(ratios))))


@dataclass
class EnsembleResult:
    """Per-realization survival (rows) at common times, with mean and standard error."""

    times: np.ndarray
    values: np.ndarray
    seeds: list[int]

    @property
    def series(self) -> SurvivalSeries:
        return SurvivalSeries(self.times, _mean_rows(self.values), _sem_rows(self.values))


def _mean_rows(values: np.ndarray) -> np.ndarray:
    return values.mean(axis=0)


def _sem_rows(values: np.ndarray) -> np.ndarray:
    n = values.shape[0]
    if n < 2:
        return np.zeros(values.shape[1])
    dev = values - values[:1]
    return dev.std(axis=0, ddof=1) / math.sqrt(n)


def propagate_batch(
    grid: SpatialGrid,
    params: LatticeParams,
    config: EvolutionConfig,
    initial_phases: np.ndarray,
    phases: np.ndarray,
    t_final: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Prepare ground states at ``initial_phases`` and propagate rows of ``phases``.

    ``phases`` has shape (R, steps) and holds the phase at each step midpoint.
    Rows sharing an initial phase share one imaginary-time relaxation.
    Returns measurement times and the normalised survival per row.
    """
    engine = _Engine(grid, params, config)
    dt = engine.dt
    _check_momentum_range(grid, params.f0, t_final)
    requested = _measure_steps(0.0, t_final, dt, params, config.measure_times)
    steps = sorted(set([0] + requested))
    keep = [steps.index(s) for s in requested]
    uniq, inverse = np.unique(np.asarray(initial_phases, dtype=float), return_inverse=True)
    out = np.empty((phases.shape[0], len(requested)))
    for lo in range(0, len(uniq), BATCH_ROWS):
        psis, _, _ = _ground_states(grid, params, config, uniq[lo : lo + BATCH_ROWS])
        for j, ground in enumerate(psis, start=lo):
            rows = np.flatnonzero(inverse == j)
            for r0 in range(0, rows.size, BATCH_ROWS):
                chunk = rows[r0 : r0 + BATCH_ROWS]
                _, windows = engine.run(np.repeat(ground[None, :], chunk.size, axis=0), 0.0, phases[chunk], steps)
                out[chunk] = _normalized_survival(windows)[:, keep]
    return np.array(requested) * dt, out


def ensemble(
    params: LatticeParams,
    noise_params: NoiseParams,
    grid: SpatialGrid,
    config: EvolutionConfig,
    n_realizations: int,
    master_seed: int,
    t_final: float | None = None,
) -> EnsembleResult:
    """Survival of ``n_realizations`` independent noise paths started in equilibrium."""
    if n_realizations < 2:
        raise ValueError("need at least two realizations")
    t_b = bloch_scales(params).t_b
    t_final = t_b if t_final is None else t_final
    dt = config.step(params)
    n_total = round(t_final / dt)
    t_mid = (np.arange(n_total) + 0.5) * dt
    seeds = [derive_seed(master_seed, i) for i in range(n_realizations)]
    ndt = choose_noise_dt(dt, noise_params.omega0)
    phases = np.empty((n_realizations, n_total))
    initial = np.empty(n_realizations)
    for i, seed in enumerate(seeds):
        path = generate_path(noise_params, n_total * dt, ndt, seed)
        phases[i] = params.phi0 + path.phase_at(t_mid)
        initial[i] = params.phi0 + path.phi[0]
    times, values = propagate_batch(grid, params, config, initial, phases, n_total * dt)
    return EnsembleResult(times=times, values=values, seeds=seeds)


def run_ensemble(
    params: LatticeParams,
    noise_params: NoiseParams,
    grid: SpatialGrid,
    config: EvolutionConfig,
    n_realizations: int,
    master_seed: int,
    t_final: float | None = None,
) -> SurvivalSeries:
    """Ensemble mean survival and the standard deviation of that mean."""
    return ensemble(params, noise_params, grid, config, n_realizations, master_seed, t_final).series
