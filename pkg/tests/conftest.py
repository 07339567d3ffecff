import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def rand_coords(rng, size, field="real"):
    x = rng.standard_normal(size)
    if field == "complex":
        x = x + 1j * rng.standard_normal(size)
    return x
