"""Shared helpers for the test suite.

Test tags used in comments:

[DERIVED]  expected value computed independently (dense oracle, brute force)
[PAPER]    expected value or relation taken from the physics reference
[TRIVIAL]  asserted directly from a definition
"""

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from thermofield.mps import PurificationMPS

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_mps(rng, d, L, D):
    """Unnormalized random MPS with bond dimension ``D`` (capped by the edges)."""
    p = d * d
    dims = [1] + [min(D, p ** min(i, L - i)) for i in range(1, L)] + [1]
    tensors = [rng.standard_normal((dims[i], p, dims[i + 1])) for i in range(L)]
    return PurificationMPS(tensors, d)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
