import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from dipolejet.geometry import Circle, Ellipse
from dipolejet.potential import GaussianBumps, PolynomialPotential, SumPotential, ZeroPotential

settings.register_profile("default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def disk():
    return Circle((0.0, 1.0), 1.0)


@pytest.fixture
def ellipse():
    return Ellipse((0.2, 0.9), (1.3, 0.9))


@pytest.fixture
def origin():
    return np.zeros(2)


def linear_q():
    return PolynomialPotential({(1, 0): 0.1, (0, 1): 0.2})


def quad_q():
    return PolynomialPotential({(0, 2): 0.05})


def cubic_q():
    return PolynomialPotential({(0, 3): 0.01})


def gauss_q():
    return SumPotential([PolynomialPotential({(0, 2): 0.05}), GaussianBumps([((0.3, 0.4), 0.02, 0.3)])])


def zero_q():
    return ZeroPotential()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
