import numpy as np
import pytest

from rspb.measures import DiscreteChannel, FiniteDist


def random_dist(rng, size, floor=1e-9):
    masses = rng.dirichlet(np.ones(size))
    masses = np.clip(masses, floor, None)
    return FiniteDist(masses / masses.sum())


def random_channel(rng, n_in, n_out, floor=1e-9):
    return DiscreteChannel(tuple(random_dist(rng, n_out, floor) for _ in range(n_in)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
