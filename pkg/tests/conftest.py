"""Shared fixtures.  Seeds are fixed so failures replay exactly."""

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(1729)


@pytest.fixture
def rng_stream():
    """Factory for independent generators with distinct fixed seeds."""

    def make(seed):
        return np.random.default_rng(seed)

    return make
