import math

import numpy as np
import pytest


def within_se(samples, expected, k=4.0):
    x = np.asarray(samples, dtype=float)
    se = x.std(ddof=1) / math.sqrt(len(x))
    return abs(x.mean() - expected) <= k * se, x.mean(), se


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
