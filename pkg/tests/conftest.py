import numpy as np
import pytest

from slicesim.config import SimConfig


@pytest.fixture
def cfg():
    c = SimConfig()
    c.validate()
    return c


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
