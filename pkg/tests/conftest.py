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


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def involutive(alpha):
    """Round alpha onto values where 1 - (1 - a) == a holds exactly."""
    return 1.0 - (1.0 - np.asarray(alpha, dtype=np.float64))
