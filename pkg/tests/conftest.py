import sys

import numpy as np
import pytest

from henochrome.grid import TransverseGrid
from henochrome.paraxial import Carrier


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def grid():
    # resolves w0 = 10 up to order 3: ds = 1.25 <= 10/6, L = 120 >= 6*10*2
    return TransverseGrid(192, 120.0)


@pytest.fixture
def carrier():
    return Carrier(1.0)


def random_field(rng, grid, d, space):
    from henochrome.grid import ComplexVectorField
    data = rng.normal(size=(grid.n, grid.n, d)) + 1j * rng.normal(size=(grid.n, grid.n, d))
    return ComplexVectorField(grid, data, space)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = sorted(getattr(mod, "LINES", []))
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in lines:
            terminalreporter.write_line(line)
