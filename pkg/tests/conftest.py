from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from genfield.grid import build_grid

settings.register_profile(
    "genfield",
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("genfield")


@pytest.fixture
def grid3():
    return build_grid(1, 3, 2 * np.pi, 1.0)


@pytest.fixture
def grid1():
    return build_grid(1, 1, 2 * np.pi, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
