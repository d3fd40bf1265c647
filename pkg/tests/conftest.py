import numpy as np
import pytest


class PinnedRng:
    """Stand-in random stream whose standard normal draws are pinned to a
    constant, for testing zero-noise (or forced-noise) paths."""

    def __init__(self, value: float = 0.0):
        self.value = value

    def standard_normal(self, size=None):
        if size is None:
            return self.value
        return np.full(size, self.value)

    def laplace(self, loc, scale):
        return loc + self.value

    def permutation(self, n):
        return np.arange(n)


@pytest.fixture
def zero_rng():
    return PinnedRng(0.0)


@pytest.fixture
def pinned_rng():
    return PinnedRng
