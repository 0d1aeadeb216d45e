"""Harmonic noise: a white-noise-driven damped oscillator for the lattice phase.

The phase obeys

    dphi/dt = mu
    dmu/dt  = -2 gamma mu - omega0**2 phi + sqrt(4 gamma T) xi(t)

with stationary moments <phi> = <mu> = 0, <phi**2> = T / omega0**2 and
<mu**2> = T. Paths are integrated with a stochastic Heun predictor-corrector.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import signal

from ._kernels import heun_path
from .seeding import make_rng

MAX_OMEGA_DT = 0.1
MIN_SPECTRUM_SAMPLES = 2**10


class NoiseError(ValueError):
    pass


class StabilityError(NoiseError):
    pass


@dataclass(frozen=True)
class NoiseParams:
    gamma: float
    omega0: float
    temperature: float

    def __post_init__(self):
        for name in ("gamma", "omega0", "temperature"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise NoiseError(f"{name} must be finite and non-negative, got {value!r}")

    @property
    def oscillatory(self) -> bool:
        """True in the underdamped regime, the only one with a spectral peak."""
        return self.omega0 > math.sqrt(2.0) * self.gamma

    @property
    def omega1(self) -> float:
        """Location of the spectral peak, ``sqrt(omega0**2 - 2 gamma**2)``."""
        if not self.oscillatory:
            raise NoiseError("omega1 is undefined for omega0 <= sqrt(2) * gamma")
        return math.sqrt(self.omega0**2 - 2.0 * self.gamma**2)

    @property
    def var_phi(self) -> float:
        if self.temperature == 0:
            return 0.0
        if self.omega0 == 0:
            return math.inf
        return self.temperature / self.omega0**2

    @property
    def var_mu(self) -> float:
        return self.temperature

    @property
    def sigma(self) -> float:
        """Amplitude multiplying the white noise in the mu equation."""
        return math.sqrt(4.0 * self.gamma * self.temperature)


@dataclass(frozen=True)
class NoiseState:
    phi: float
    mu: float

    def __post_init__(self):
        if not (math.isfinite(self.phi) and math.isfinite(self.mu)):
            raise NoiseError(f"non-finite noise state ({self.phi}, {self.mu})")


@dataclass(frozen=True, eq=False)
class NoisePath:
    """A sampled trajectory on the uniform time axis ``t_i = i * dt``."""

    dt: float
    phi: np.ndarray
    mu: np.ndarray
    seed: int
    params: NoiseParams | None = field(default=None)

    def __post_init__(self):
        if not self.dt > 0:
            raise NoiseError("path dt must be positive")
        if self.phi.shape != self.mu.shape or self.phi.ndim != 1:
            raise NoiseError("phi and mu must be 1-D arrays of equal length")
        if len(self.phi) < 2:
            raise NoiseError("a path needs at least two samples")

    def __len__(self) -> int:
        return len(self.phi)

    def __getitem__(self, i: int) -> NoiseState:
        return NoiseState(float(self.phi[i]), float(self.mu[i]))

    @property
    def samples(self) -> list[NoiseState]:
        return [self[i] for i in range(len(self))]

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.phi)) * self.dt

    @property
    def duration(self) -> float:
        return (len(self.phi) - 1) * self.dt

    def phase_at(self, t) -> np.ndarray:
        """Linearly interpolated phase at times ``t`` (measured from the path start)."""
        t = np.asarray(t, dtype=float)
        if t.size and (t.min() < -1e-9 * self.dt or t.max() > self.duration * (1 + 1e-12) + 1e-9 * self.dt):
            raise NoiseError(
                f"requested times [{t.min():g}, {t.max():g}] outside path coverage [0, {self.duration:g}]"
            )
        return np.interp(t, self.times, self.phi)

    def save(self, destination) -> None:
        """Write ``# t phi mu`` rows at full double precision."""
        with open(destination, "w", encoding="utf-8") as fh:
            fh.write("# t phi mu\n")
            for t, p, m in zip(self.times, self.phi, self.mu):
                fh.write(f"{t:.17g} {p:.17g} {m:.17g}\n")

    @classmethod
    def load(cls, source, seed: int = 0) -> "NoisePath":
        data = np.loadtxt(Path(source), comments="#", ndmin=2)
        t = data[:, 0]
        dt = float(t[1] - t[0])
        if not np.allclose(np.diff(t), dt, rtol=1e-9, atol=0):
            raise NoiseError("path file does not have a uniform time axis")
        return cls(dt=dt, phi=data[:, 1].copy(), mu=data[:, 2].copy(), seed=seed)


def sample_equilibrium(params: NoiseParams, rng: np.random.Generator) -> NoiseState:
    """Draw (phi, mu) from the stationary bivariate Gaussian.

    phi and mu are independent with variances ``T / omega0**2`` and ``T``.
    At zero temperature the distribution collapses onto the origin.
    """
    if params.temperature == 0:
        return NoiseState(0.0, 0.0)
    if params.omega0 == 0:
        raise NoiseError("stationary phase distribution is degenerate for omega0 = 0 and T > 0")
    phi, mu = rng.standard_normal(2)
    return NoiseState(float(phi * math.sqrt(params.var_phi)), float(mu * math.sqrt(params.var_mu)))


def _check_dt(params: NoiseParams, dt: float) -> None:
    if not dt > 0:
        raise StabilityError(f"dt must be positive, got {dt!r}")
    if dt * params.omega0 >= MAX_OMEGA_DT:
        raise StabilityError(
            f"dt * omega0 = {dt * params.omega0:.3g} violates the stability guard dt * omega0 < {MAX_OMEGA_DT}"
        )


def step(state: NoiseState, params: NoiseParams, dt: float, noise_increment: float) -> NoiseState:
    """Advance (phi, mu) by one Heun step.

    ``noise_increment`` is a standard normal number; it is scaled by
    ``sqrt(4 gamma T dt)`` and used for both predictor and corrector.
    """
    _check_dt(params, dt)
    w2 = params.omega0 * params.omega0
    dw = params.sigma * math.sqrt(dt) * noise_increment
    p, m = state.phi, state.mu
    a0 = -2.0 * params.gamma * m - w2 * p
    pp = p + m * dt
    mp = m + a0 * dt + dw
    ap = -2.0 * params.gamma * mp - w2 * pp
    return NoiseState(p + 0.5 * (m + mp) * dt, m + 0.5 * (a0 + ap) * dt + dw)


def n_steps_for(t_total: float, dt: float) -> int:
    return max(1, math.ceil(t_total / dt - 1e-9))


def generate_path(
    params: NoiseParams,
    t_total: float,
    dt: float,
    seed: int,
    start: str | NoiseState = "equilibrium",
) -> NoisePath:
    """Integrate one realization covering ``[0, t_total]``.

    The path has ``ceil(t_total / dt) + 1`` samples. With
    ``start="equilibrium"`` the initial state is drawn from the stationary
    distribution using the same stream that later supplies the increments.
    """
    if not t_total > 0:
        raise NoiseError("t_total must be positive")
    _check_dt(params, dt)
    rng = make_rng(seed)
    if isinstance(start, NoiseState):
        s0 = start
    elif start == "equilibrium":
        s0 = sample_equilibrium(params, rng)
    else:
        raise NoiseError(f"unknown start {start!r}")
    n = n_steps_for(t_total, dt)
    xi = rng.standard_normal(n)
    phi, mu = heun_path(s0.phi, s0.mu, params.gamma, params.omega0, params.sigma, dt, xi)
    return NoisePath(dt=dt, phi=phi, mu=mu, seed=seed, params=params)


@dataclass(frozen=True)
class PathMoments:
    mean_phi: float
    mean_mu: float
    var_phi: float
    var_mu: float
    cov_phi_mu: float
    se_mean_phi: float
    se_mean_mu: float
    se_var_phi: float
    se_var_mu: float
    se_cov_phi_mu: float
    n_paths: int
    n_samples: int


def path_moments(paths: Sequence[NoisePath], burn_in: float = 0.0) -> PathMoments:
    """Pooled sample moments over all paths and all times ``t >= burn_in``.

    Samples along one path are strongly correlated, so standard errors are
    taken from the scatter of the per-path estimates across the (independent)
    paths rather than from the pooled sample count.
    """
    paths = list(paths)
    if len(paths) < 2:
        raise NoiseError("path_moments needs at least two paths")
    phis, mus = [], []
    for path in paths:
        keep = path.times >= burn_in - 1e-12 * path.dt
        if not keep.any():
            raise NoiseError("burn-in leaves no samples")
        phis.append(path.phi[keep])
        mus.append(path.mu[keep])
    all_phi = np.concatenate(phis)
    all_mu = np.concatenate(mus)
    n = all_phi.size
    mean_phi, mean_mu = all_phi.mean(), all_mu.mean()
    dphi, dmu = all_phi - mean_phi, all_mu - mean_mu
    denom = max(n - 1, 1)
    pooled = (
        float(np.sum(dphi * dphi) / denom),
        float(np.sum(dmu * dmu) / denom),
        float(np.sum(dphi * dmu) / denom),
    )
    per_path = np.array(
        [
            [
                p.mean(),
                m.mean(),
                np.mean((p - mean_phi) ** 2),
                np.mean((m - mean_mu) ** 2),
                np.mean((p - mean_phi) * (m - mean_mu)),
            ]
            for p, m in zip(phis, mus)
        ]
    )
    se = per_path.std(axis=0, ddof=1) / math.sqrt(len(paths))
    return PathMoments(
        mean_phi=float(mean_phi),
        mean_mu=float(mean_mu),
        var_phi=pooled[0],
        var_mu=pooled[1],
        cov_phi_mu=pooled[2],
        se_mean_phi=float(se[0]),
        se_mean_mu=float(se[1]),
        se_var_phi=float(se[2]),
        se_var_mu=float(se[3]),
        se_cov_phi_mu=float(se[4]),
        n_paths=len(paths),
        n_samples=n,
    )


def power_spectrum(path: NoisePath, segments: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """One-sided periodogram of phi against angular frequency.

    The mean is removed before transforming. ``segments > 1`` splits the
    path into equal non-overlapping pieces and averages their periodograms
    (Bartlett), trading frequency resolution ``2 pi / (n dt)`` for variance.
    The density is normalised so that its integral over ``omega`` equals
    the sample variance.
    """
    n = len(path.phi)
    if n < MIN_SPECTRUM_SAMPLES:
        raise NoiseError(f"power spectrum needs at least {MIN_SPECTRUM_SAMPLES} samples, got {n}")
    if segments < 1 or n // segments < 16:
        raise NoiseError("too many segments for this path length")
    nperseg = n // segments
    used = path.phi[: nperseg * segments]
    freq, density = signal.welch(
        used,
        fs=1.0 / path.dt,
        window="boxcar",
        nperseg=nperseg,
        noverlap=0,
        detrend="constant",
        scaling="density",
    )
    return 2.0 * np.pi * freq, density / (2.0 * np.pi)


def spectral_peak(path: NoisePath, segments: int = 1) -> tuple[float, float]:
    """Angular frequency of the periodogram maximum and the bin width."""
    omega, density = power_spectrum(path, segments)
    return float(omega[1:][np.argmax(density[1:])]), float(omega[1] - omega[0])


def generate_paths(
    params: NoiseParams, t_total: float, dt: float, seeds: Iterable[int], start="equilibrium"
) -> list[NoisePath]:
    return [generate_path(params, t_total, dt, s, start) for s in seeds]


def choose_noise_dt(dt: float, omega0: float, limit: float = 0.05) -> float:
    """Largest ``dt / 2**k`` with ``omega0 * dt / 2**k < limit``."""
    while dt * omega0 >= limit:
        dt *= 0.5
    return dt
