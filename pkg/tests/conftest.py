import numpy as np
import pytest

from roekit.generators import grid_space, path_space
from roekit.operator import LinearOperator


@pytest.fixture(scope="session")
def p5():
    return path_space(5)[0]


@pytest.fixture(scope="session")
def p10():
    return path_space(10)[0]


@pytest.fixture(scope="session")
def grid44():
    return grid_space(4, 4)[0]


def random_operator(space, rng, band=None):
    n = len(space)
    m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    if band is not None:
        m = np.where(space.dist <= band, m, 0.0)
    return LinearOperator(space, space, m)
