import numpy as np
import pytest

from s3saddle import BlockSystem3


def arrow_sys(A1, A2, A3, B1, B2):
    return BlockSystem3(A1, A2, A3, B1, B2, layout="arrow")


def tri_sys(A1, A2, A3, B1, B2):
    return BlockSystem3(A1, A2, A3, B1, B2, layout="tridiagonal")


@pytest.fixture
def orthogonal_arrow():
    """A1 = I2, B1 = [1 0], B2 = [0 1], A2 = A3 = 0."""
    z = np.zeros((1, 1))
    return arrow_sys(np.eye(2), z, z, [[1.0, 0.0]], [[0.0, 1.0]])


@pytest.fixture
def unit_tridiag():
    """All-scalar tridiagonal system A1 = B1 = B2 = 1, A2 = A3 = 0."""
    one, z = np.ones((1, 1)), np.zeros((1, 1))
    return tri_sys(one, z, z, one, one)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
