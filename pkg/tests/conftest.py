import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

seeds = __import__("hypothesis.strategies", fromlist=["integers"]).integers(0, 2**32 - 1)


def half_space_oracle(g, w, h):
    """Poincare extension of z -> (az + b)/(cz + d) to the upper half-space."""
    (a, b), (c, d) = g
    cw = c * w + d
    den = abs(cw) ** 2 + abs(c) ** 2 * h * h
    num = (a * w + b) * np.conj(cw) + a * np.conj(c) * h * h
    return np.array([num.real / den, num.imag / den, h / den])


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)
