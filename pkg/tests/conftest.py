import numpy as np
import pytest

from wavedamp import MultiplierField, lower_left_dirichlet_partition, unit_square


@pytest.fixture
def square():
    return unit_square()


@pytest.fixture
def study_partition():
    return lower_left_dirichlet_partition()


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def make_field(theta, x0):
    return MultiplierField(theta, np.asarray(x0, dtype=float))
