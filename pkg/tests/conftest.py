import numpy as np
import pytest

from anslab.fields import Grid3


@pytest.fixture(scope="session")
def grid16():
    return Grid3.cube(16)


@pytest.fixture(scope="session")
def grid32():
    return Grid3.cube(32)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
