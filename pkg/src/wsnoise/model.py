"""Static lattice parameters, Bloch scales and unit conversions.

Dimensionless units: lattice wavenumber 1 (period 2 pi), mass 1, hbar 1.
The tilted bichromatic potential is ``V0 [cos x + cos(alpha (x - phi))] - F0 x``;
the Stark term is handled by the propagator's accelerated frame and is not
part of :func:`potential`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import constants

MAX_ALPHA_DENOMINATOR = 64


@dataclass(frozen=True)
class LatticeParams:
    v0: float
    f0: float
    alpha: float = 1.0
    phi0: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.v0) and self.v0 >= 0):
            raise ValueError(f"v0 must be finite and non-negative, got {self.v0!r}")
        if not (math.isfinite(self.f0) and self.f0 >= 0):
            raise ValueError(f"f0 must be finite and non-negative, got {self.f0!r}")
        if not 0 < self.alpha <= 4:
            raise ValueError(f"alpha must lie in (0, 4], got {self.alpha!r}")
        if not math.isfinite(self.phi0):
            raise ValueError("phi0 must be finite")


@dataclass(frozen=True)
class BlochScales:
    t_b: float
    omega_b: float


def bloch_scales(params: LatticeParams) -> BlochScales:
    if not params.f0 > 0:
        raise ValueError("Bloch scales need f0 > 0")
    return BlochScales(t_b=1.0 / params.f0, omega_b=2.0 * math.pi * params.f0)


def potential(x, phi, params: LatticeParams, second_lattice: bool = True):
    """Periodic part of the lattice potential at positions ``x`` and phase ``phi``."""
    x = np.asarray(x, dtype=float)
    v = np.cos(x)
    if second_lattice:
        v = v + np.cos(params.alpha * (x - phi))
    return params.v0 * v


def rational_alpha(alpha: float, max_denominator: int = MAX_ALPHA_DENOMINATOR) -> Fraction:
    """Closest fraction a/b to ``alpha`` with b <= ``max_denominator`` (0.618 -> 34/55)."""
    return Fraction(alpha).limit_denominator(max_denominator)


RB87_MASS = 86.909180527 * constants.physical_constants["atomic mass constant"][0]
DEFAULT_LATTICE_SPACING = 426e-9


@dataclass(frozen=True)
class UnitContext:
    recoil_energy: float
    laser_wavenumber: float
    atom_mass: float

    def __post_init__(self):
        expected = constants.hbar**2 * self.laser_wavenumber**2 / (2.0 * self.atom_mass)
        if not math.isclose(self.recoil_energy, expected, rel_tol=1e-12):
            raise ValueError("recoil_energy must equal hbar**2 k_L**2 / (2 M)")

    @classmethod
    def from_setup(cls, lattice_spacing: float = DEFAULT_LATTICE_SPACING, atom_mass: float = RB87_MASS):
        """Context for a lattice of spacing ``d_l`` (k_L = pi / d_l); defaults to 87Rb at 426 nm."""
        k_l = math.pi / lattice_spacing
        return cls(constants.hbar**2 * k_l**2 / (2.0 * atom_mass), k_l, atom_mass)


QUANTITIES = ("energy", "time", "space", "force", "potential")
SYSTEMS = ("si", "dimensionless", "experimental")


def _scale(quantity: str, system: str, ctx: UnitContext) -> float:
    """Factor s with value_in_system = s * value_in_SI."""
    e, k = ctx.recoil_energy, ctx.laser_wavenumber
    table = {
        ("energy", "dimensionless"): 1.0 / (8.0 * e),
        ("energy", "experimental"): 1.0 / e,
        ("time", "dimensionless"): 8.0 * e / constants.hbar,
        ("time", "experimental"): 1.0,
        ("space", "dimensionless"): 2.0 * k,
        ("space", "experimental"): 2.0 * k,
        ("force", "dimensionless"): 1.0 / (16.0 * e * k),
        ("force", "experimental"): math.pi / (e * k),
        ("potential", "dimensionless"): 1.0 / (8.0 * e),
        ("potential", "experimental"): 1.0 / e,
    }
    if quantity not in QUANTITIES or system not in SYSTEMS:
        raise ValueError(f"unknown unit pair ({quantity!r}, {system!r})")
    return 1.0 if system == "si" else table[(quantity, system)]


def convert(value: float, quantity: str, from_: str, to: str, ctx: UnitContext | None = None) -> float:
    """Convert ``value`` of ``quantity`` between SI, dimensionless and experimental units."""
    ctx = ctx or UnitContext.from_setup()
    s_from = _scale(quantity, from_, ctx)
    s_to = _scale(quantity, to, ctx)
    if from_ == to:
        return value
    return value * (s_to / s_from)
