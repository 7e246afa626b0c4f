from datetime import datetime, timedelta, timezone

import numpy as np
import pytest

from aerofactor.tensor import SpatioTemporalTensor

T0 = datetime(2018, 3, 12, 0, 0, tzinfo=timezone.utc)


def make_tensor(values, mask=None, step_hours=12):
    values = np.asarray(values, dtype=float)
    t, n, d = values.shape
    if mask is None:
        mask = np.ones(values.shape, dtype=bool)
    return SpatioTemporalTensor(
        values=values,
        mask=np.asarray(mask, dtype=bool),
        time_index=tuple(T0 + i * timedelta(hours=step_hours) for i in range(t)),
        station_index=tuple(f"S{j + 1:02d}" for j in range(n)),
        feature_index=tuple(f"sp{f + 1:02d}" for f in range(d)),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
