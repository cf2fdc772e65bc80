import numpy as np
import pytest

from freqpanel._threads import limit_blas_threads
from freqpanel.series import Panel, TimeSeries

limit_blas_threads(1)  # BLAS oversubscription dominates runtime on small boxes


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)


def make_series(values, first_year=1960, unit="u1", label=""):
    values = np.asarray(values, dtype=float)
    years = np.arange(first_year, first_year + values.size)
    return TimeSeries(unit, years, values, label)


def make_panel(values, first_year=1960, weights=None, label=""):
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    units = tuple(f"u{i+1}" for i in range(n))
    years = np.arange(first_year, first_year + values.shape[1])
    p = Panel(units, years, values, None, label)
    return p if weights is None else p.with_weights(weights)


@pytest.fixture
def random_series(rng):
    def _make(T=80, unit="u1", smooth_scale=0.3, noise_scale=1.0, demeaned=True):
        v = smooth_scale * np.cumsum(rng.standard_normal(T)) + noise_scale * rng.standard_normal(T)
        if demeaned:
            v = v - v.mean()
        return make_series(v, unit=unit)

    return _make
