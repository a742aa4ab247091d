import math

import numpy as np
import pytest
from hypothesis import settings

from afmcf.foliation import AmbientFoliation
from afmcf.grid import PeriodicGrid
from afmcf.surface import make_fuchsian, synthetic_example

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

TWO_PI = 2 * math.pi


@pytest.fixture
def grid32():
    return PeriodicGrid(32, 32, TWO_PI, TWO_PI)


@pytest.fixture
def synthetic32(grid32):
    return synthetic_example(grid32, lambda0=0.5)


@pytest.fixture
def fuchsian_fol(grid32):
    return AmbientFoliation(make_fuchsian(grid32))


@pytest.fixture
def synthetic_fol(synthetic32):
    return AmbientFoliation(synthetic32)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import VERDICTS
    except ImportError:
        return
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(VERDICTS):
            terminalreporter.write_line(VERDICTS[n])
