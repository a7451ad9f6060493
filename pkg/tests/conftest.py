import numpy as np
import pytest

from kdv_hermite import SplineFunction, SplineSpace


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_spline(space, rng, scale=1.0):
    return SplineFunction(space, scale * rng.standard_normal(space.ndof))


def localized_spline(space, rng, width=3):
    """Random coefficients on ``width`` consecutive nodes at a random location."""
    c = np.zeros(space.ndof)
    j = rng.integers(space.num_nodes)
    idx = np.concatenate([[2 * ((j + i) % space.num_nodes), 2 * ((j + i) % space.num_nodes) + 1]
                          for i in range(width)])
    c[idx] = rng.standard_normal(idx.size)
    return SplineFunction(space, c)


def seam_free_spline(space, rng, margin=3):
    """Random spline whose coefficients vanish within ``margin`` nodes of the periodic seam."""
    c = rng.standard_normal(space.ndof)
    m = space.num_nodes
    for j in list(range(margin)) + list(range(m - margin, m)):
        c[2 * j : 2 * j + 2] = 0.0
    return SplineFunction(space, c)
