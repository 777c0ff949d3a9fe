import numpy as np
import pytest

from logsl import Field, GridSpec


@pytest.fixture
def grid():
    return GridSpec(1, 128)


@pytest.fixture
def psi0(grid):
    return Field.from_function(grid, lambda x: 1.0 / (1.0 + 0.2 * np.cos(x)))
