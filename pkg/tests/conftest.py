import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=50, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

F0 = 0.00762
GAMMA = 0.00762
T_B = 1.0 / F0


@pytest.fixture
def f0():
    return F0


SWEEP_STEPS = 2**12


def _sweep(alpha, points=201):
    from wsnoise.model import LatticeParams
    from wsnoise.propagator import EvolutionConfig
    from wsnoise.quasistatic import beta_sweep

    params = LatticeParams(0.125, F0, alpha)
    return beta_sweep(params, np.linspace(-3.0, 3.0, points), None, EvolutionConfig(dt=T_B / SWEEP_STEPS))


@pytest.fixture(scope="session")
def fig1_sweep():
    """Moving-lattice survival at alpha = 0.61 on the default 201-point grid."""
    return _sweep(0.61)


@pytest.fixture(scope="session")
def golden_sweep():
    return _sweep(0.618)


@pytest.fixture(scope="session")
def alpha1_sweep():
    return _sweep(1.0)


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record_acceptance(number: int, passed: bool, detail: str) -> bool:
    """Store one acceptance verdict for the end-of-run summary."""
    ACCEPTANCE[number] = (bool(passed), detail)
    print(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
