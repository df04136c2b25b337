import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from drift_replay.records import RecordArrays

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("default")


def ratings_batch(ys, users=None, items=None):
    """Records with the given rating targets (ids default to 0)."""
    ys = np.asarray(ys, dtype=float)
    n = len(ys)
    users = np.zeros(n, dtype=np.int64) if users is None else users
    items = np.zeros(n, dtype=np.int64) if items is None else items
    return RecordArrays(users, items, ys, np.full(n, -1), np.arange(n))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
