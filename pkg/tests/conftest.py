import numpy as np
import pytest

from evanom.events import EventStream


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_stream(rng, n=200, width=16, height=12, t_max=100_000):
    return EventStream.from_arrays(
        width, height,
        rng.integers(0, width, n),
        rng.integers(0, height, n),
        np.sort(rng.integers(0, t_max, n)),
        rng.choice([1, -1], n))
