"""Deterministic synthetic sample data for demos and CLI smoke tests.

A small US-like panel: temperature with a common warming trend and
heterogeneous loadings over a long record, growth over a shorter one with
a business-cycle factor and a mild negative response to the slow
temperature component.
"""
from __future__ import annotations

import numpy as np

from .lowfreq import mw_basis
from .series import Panel

__all__ = ["sample_temperature_panel", "sample_growth_panel", "sample_weights"]

_UNITS = ("AL", "CA", "FL", "IL", "MA", "ND", "NY", "TX", "WA", "WI")


def sample_temperature_panel(seed: int = 2026, n_units: int = 10) -> Panel:
    units = _UNITS[:n_units]
    rng = np.random.default_rng([seed, 1])
    years = np.arange(1895, 2024)
    T = years.size
    t = np.arange(T)
    core = 1.8 * (t / T) ** 2 + mw_basis(T, 8) @ rng.normal(0.0, 0.4, 8)
    base = rng.uniform(40.0, 70.0, len(units))
    load = 1.0 + 0.3 * rng.standard_normal(len(units))
    noise = 0.9 * rng.standard_normal((len(units), T))
    values = base[:, None] + np.outer(load, core) + noise
    return Panel(units, years, np.round(values, 2), None, "degF", {"source": "sample"})


def sample_growth_panel(seed: int = 2026, n_units: int = 10) -> Panel:
    x = sample_temperature_panel(seed, n_units)
    rng = np.random.default_rng([seed, 2])
    years = np.arange(1964, 2024)
    T = years.size
    keep = np.isin(x.years, years)
    slow = x.values[:, keep] - x.values[:, x.years < 1980].mean(axis=1, keepdims=True)
    cycle = np.zeros(T)
    for s in range(1, T):
        cycle[s] = 0.6 * cycle[s - 1] + rng.normal(0.0, 0.9)
    lam = 1.0 + 0.4 * rng.standard_normal(x.n_units)
    values = (
        2.0
        - 0.4 * slow
        + np.outer(lam, cycle)
        + 1.2 * rng.standard_normal((x.n_units, T))
    )
    return Panel(x.unit_ids, years, np.round(values, 4), None, "pct_growth", {"source": "sample"})


def sample_weights(seed: int = 2026, n_units: int = 10) -> dict:
    rng = np.random.default_rng([seed, 3])
    w = rng.uniform(0.5, 4.0, n_units)
    w = w / w.sum()
    return {u: float(v) for u, v in zip(_UNITS[:n_units], w)}
