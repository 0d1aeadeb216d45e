import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import constants

from wsnoise.model import (
    QUANTITIES,
    SYSTEMS,
    LatticeParams,
    UnitContext,
    bloch_scales,
    convert,
    potential,
    rational_alpha,
)


def test_bloch_scales_reference():
    s = bloch_scales(LatticeParams(0.125, 0.00762))
    assert s.t_b == pytest.approx(131.234, abs=5e-4)
    assert s.omega_b == pytest.approx(0.047878, abs=5e-7)


@pytest.mark.parametrize("f0,t_b", [(1.0, 1.0), (0.5, 2.0)])
def test_bloch_scales_simple(f0, t_b):
    s = bloch_scales(LatticeParams(0.1, f0))
    assert s.t_b == t_b
    if f0 == 1.0:
        assert s.omega_b == 2 * math.pi


def test_bloch_scales_needs_force():
    with pytest.raises(ValueError):
        bloch_scales(LatticeParams(0.1, 0.0))


@given(st.floats(1e-6, 1e3))
def test_bloch_product_is_two_pi(f0):
    s = bloch_scales(LatticeParams(0.1, f0))
    assert s.omega_b * s.t_b == pytest.approx(2 * math.pi, rel=1e-15)


@pytest.mark.parametrize(
    "kwargs",
    [dict(v0=-1.0, f0=0.1), dict(v0=math.nan, f0=0.1), dict(v0=0.1, f0=-0.1), dict(v0=0.1, f0=0.1, alpha=0.0),
     dict(v0=0.1, f0=0.1, alpha=4.5), dict(v0=0.1, f0=0.1, phi0=math.inf)],
)
def test_lattice_params_validation(kwargs):
    with pytest.raises(ValueError):
        LatticeParams(**kwargs)


def test_potential_examples():
    p = LatticeParams(0.125, 0.00762, alpha=0.618)
    assert potential(0.0, 0.0, p) == pytest.approx(0.25)
    assert potential(0.0, math.pi, LatticeParams(0.3, 0.1)) == pytest.approx(0.0, abs=1e-16)
    # 0.125 cos(0.618 pi / 2) evaluated independently
    assert potential(math.pi / 2, 0.0, p) == pytest.approx(0.0705849, abs=5e-7)
    assert potential(math.pi / 2, 0.0, p, second_lattice=False) == pytest.approx(0.0, abs=1e-16)


@pytest.mark.parametrize("a,b", [(1, 1), (3, 5), (34, 55), (61, 100)])
def test_potential_commensurate_period(a, b):
    p = LatticeParams(0.2, 0.01, alpha=a / b)
    x = np.linspace(-7.0, 7.0, 101)
    np.testing.assert_allclose(potential(x + 2 * math.pi * b, 0.3, p), potential(x, 0.3, p), atol=1e-11)


def test_rational_alpha():
    assert rational_alpha(0.618) == Fraction(34, 55)
    assert rational_alpha(1.0) == 1
    assert rational_alpha(0.61) == Fraction(36, 59)


def test_unit_context_consistency():
    ctx = UnitContext.from_setup()
    assert ctx.laser_wavenumber == pytest.approx(math.pi / 426e-9)
    with pytest.raises(ValueError):
        UnitContext(ctx.recoil_energy * 1.01, ctx.laser_wavenumber, ctx.atom_mass)


def test_convert_potential_to_experimental():
    assert convert(0.125, "potential", "dimensionless", "experimental") == pytest.approx(1.0, rel=1e-12)


def test_convert_force_to_experimental():
    assert convert(0.00762, "force", "dimensionless", "experimental") == pytest.approx(16 * math.pi * 0.00762, rel=1e-12)
    assert 16 * math.pi * 0.00762 == pytest.approx(0.38302, abs=1e-5)


def test_convert_time_scale():
    ctx = UnitContext.from_setup()
    t = convert(1.0, "time", "si", "dimensionless", ctx)
    assert t == pytest.approx(8 * ctx.recoil_energy / constants.hbar, rel=1e-12)


def test_convert_unknown_pair():
    with pytest.raises(ValueError):
        convert(1.0, "mass", "si", "dimensionless")
    with pytest.raises(ValueError):
        convert(1.0, "energy", "si", "cgs")


@given(
    st.floats(-1e6, 1e6, allow_nan=False),
    st.sampled_from(QUANTITIES),
    st.sampled_from(SYSTEMS),
    st.sampled_from(SYSTEMS),
)
def test_convert_round_trip(value, quantity, a, b):
    ctx = UnitContext.from_setup()
    there = convert(value, quantity, a, b, ctx)
    back = convert(there, quantity, b, a, ctx)
    assert back == pytest.approx(value, rel=1e-12, abs=1e-300)
    if a == b:
        assert there == value
