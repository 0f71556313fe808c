import numpy as np
import pytest
from hypothesis import settings

from orlicz_lab.measure import random_simple

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def corpus(rng):
    return [random_simple(rng, max_atoms=64) for _ in range(200)]
