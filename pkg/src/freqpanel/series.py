"""Annual series/panel containers, demeaning, aggregation, correlograms.

All containers are immutable after construction and reject missing values;
gaps are resolved at ingestion so the numerical code stays branch-free.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

import numpy as np

from .errors import AxisMismatch, LagTooLarge, MissingWeights, NoPreCutoffData

__all__ = [
    "TimeSeries",
    "Panel",
    "Decomposition",
    "Correlogram",
    "demean_pre_cutoff",
    "weighted_aggregate",
    "autocorrelation",
]

WEIGHT_SUM_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def _year_axis(years) -> np.ndarray:
    years = np.asarray(years, dtype=np.int64)
    if years.ndim != 1 or years.size == 0:
        raise ValueError("year axis must be a non-empty 1-D sequence")
    if years.size > 1 and not np.all(np.diff(years) == 1):
        raise ValueError("years must be strictly consecutive and ascending")
    return years


@dataclass(frozen=True)
class TimeSeries:
    """One unit's annual observations on a consecutive year grid."""

    unit_id: str
    years: np.ndarray
    values: np.ndarray
    units_label: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        years = _year_axis(self.years)
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != years.shape:
            raise ValueError(
                f"series {self.unit_id!r}: values length {values.size} "
                f"!= years length {years.size}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError(
                f"series {self.unit_id!r} contains non-finite values; "
                "resolve missing data at ingestion"
            )
        object.__setattr__(self, "years", _frozen(years))
        object.__setattr__(self, "values", _frozen(values.copy()))

    def __len__(self) -> int:
        return int(self.years.size)

    def with_values(self, values, **meta) -> "TimeSeries":
        """Same axis and labels, new values; `meta` entries are merged in."""
        return TimeSeries(
            self.unit_id, self.years, values, self.units_label, {**self.meta, **meta}
        )

    def window(self, first_year: int, last_year: int) -> "TimeSeries":
        """Restrict to the years in [first_year, last_year]."""
        keep = (self.years >= first_year) & (self.years <= last_year)
        if not keep.any():
            raise AxisMismatch(
                f"series {self.unit_id!r} has no years in [{first_year}, {last_year}]"
            )
        return TimeSeries(
            self.unit_id, self.years[keep], self.values[keep], self.units_label, dict(self.meta)
        )


@dataclass(frozen=True)
class Panel:
    """Rectangular unit-by-year array with optional static unit weights."""

    unit_ids: tuple
    years: np.ndarray
    values: np.ndarray
    weights: np.ndarray | None = None
    units_label: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        unit_ids = tuple(str(u) for u in self.unit_ids)
        if len(set(unit_ids)) != len(unit_ids):
            raise ValueError("duplicate unit ids in panel")
        years = _year_axis(self.years)
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (len(unit_ids), years.size):
            raise ValueError(
                f"panel values shape {values.shape} != (N={len(unit_ids)}, T={years.size})"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("panel contains non-finite values")
        object.__setattr__(self, "unit_ids", unit_ids)
        object.__setattr__(self, "years", _frozen(years))
        object.__setattr__(self, "values", _frozen(values.copy()))
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=np.float64)
            if w.shape != (len(unit_ids),):
                raise ValueError("weights must have one entry per unit")
            if np.any(w < 0):
                raise ValueError("weights must be nonnegative")
            if abs(w.sum() - 1.0) > WEIGHT_SUM_TOL:
                raise ValueError(f"weights must sum to 1 (got {w.sum()!r})")
            object.__setattr__(self, "weights", _frozen(w.copy()))

    @property
    def n_units(self) -> int:
        return len(self.unit_ids)

    @property
    def n_years(self) -> int:
        return int(self.years.size)

    def unit_index(self, unit_id: str) -> int:
        try:
            return self.unit_ids.index(unit_id)
        except ValueError:
            raise KeyError(f"unit {unit_id!r} not in panel") from None

    def row(self, unit_id: str) -> TimeSeries:
        i = self.unit_index(unit_id)
        return TimeSeries(unit_id, self.years, self.values[i], self.units_label)

    def iter_rows(self) -> Iterator[TimeSeries]:
        for i, u in enumerate(self.unit_ids):
            yield TimeSeries(u, self.years, self.values[i], self.units_label)

    def with_values(self, values, **meta) -> "Panel":
        return Panel(
            self.unit_ids, self.years, values, self.weights, self.units_label,
            {**self.meta, **meta},
        )

    def with_weights(self, weights, normalize: bool = True) -> "Panel":
        """Attach static unit weights given as a mapping or a sequence."""
        if isinstance(weights, Mapping):
            missing = [u for u in self.unit_ids if u not in weights]
            if missing:
                raise MissingWeights(f"no weight for units {missing}")
            w = np.array([float(weights[u]) for u in self.unit_ids])
        else:
            w = np.asarray(weights, dtype=np.float64)
        if normalize:
            total = w.sum()
            if total <= 0:
                raise ValueError("weights must have a positive sum")
            w = w / total
        return Panel(self.unit_ids, self.years, self.values, w, self.units_label, dict(self.meta))

    def window(self, first_year: int, last_year: int) -> "Panel":
        keep = (self.years >= first_year) & (self.years <= last_year)
        if not keep.any():
            raise AxisMismatch(f"panel has no years in [{first_year}, {last_year}]")
        return Panel(
            self.unit_ids, self.years[keep], self.values[:, keep], self.weights,
            self.units_label, dict(self.meta),
        )

    def subset_units(self, unit_ids: Sequence[str]) -> "Panel":
        idx = [self.unit_index(u) for u in unit_ids]
        w = None if self.weights is None else self.weights[idx] / self.weights[idx].sum()
        return Panel(
            tuple(unit_ids), self.years, self.values[idx], w, self.units_label, dict(self.meta)
        )

    @staticmethod
    def from_rows(rows: Sequence[TimeSeries], weights=None, meta: dict | None = None) -> "Panel":
        if not rows:
            raise ValueError("cannot build a panel from zero series")
        years = rows[0].years
        for s in rows[1:]:
            if not np.array_equal(s.years, years):
                raise AxisMismatch(f"series {s.unit_id!r} is not on the shared year axis")
        p = Panel(
            tuple(s.unit_id for s in rows),
            years,
            np.vstack([s.values for s in rows]),
            None,
            rows[0].units_label,
            meta or {},
        )
        return p if weights is None else p.with_weights(weights)


@dataclass(frozen=True)
class Decomposition:
    """Paired low/high-frequency split of one series.

    ``low + high`` reconstructs the input elementwise, except for the
    predictive-regression filter whose components exist only for the last
    T - p - h periods. ``coeffs`` holds the cosine projection coefficients
    when the split comes from the cosine-basis estimator.
    """

    low: TimeSeries
    high: TimeSeries
    method: str
    params: dict = field(default_factory=dict)
    coeffs: np.ndarray | None = None

    def __post_init__(self):
        if not np.array_equal(self.low.years, self.high.years):
            raise AxisMismatch("low and high components must share a year axis")
        if self.coeffs is not None:
            object.__setattr__(
                self, "coeffs", _frozen(np.asarray(self.coeffs, dtype=np.float64).copy())
            )

    def label(self) -> str:
        inner = ",".join(f"{k}={v:g}" if isinstance(v, float) else f"{k}={v}"
                         for k, v in self.params.items())
        return f"{self.method}({inner})"


@dataclass(frozen=True)
class Correlogram:
    """Sample autocorrelations r_1..r_K with the no-autocorrelation band."""

    lags: np.ndarray
    values: np.ndarray
    null_band: float


def demean_pre_cutoff(s: TimeSeries, cutoff_year: int) -> TimeSeries:
    """Subtract the mean of the observations strictly before `cutoff_year`.

    Requires at least two pre-cutoff observations. Idempotent: a second
    application subtracts zero. The cutoff is recorded in the series meta.
    """
    pre = s.years < cutoff_year
    if pre.sum() < 2:
        raise NoPreCutoffData(
            f"series {s.unit_id!r} has {int(pre.sum())} observations before "
            f"{cutoff_year}; need at least 2"
        )
    m = float(s.values[pre].mean())
    return s.with_values(s.values - m, demean_cutoff=int(cutoff_year))


def weighted_aggregate(p: Panel) -> TimeSeries:
    """Weighted cross-sectional average, returned as a series named "aggregate"."""
    if p.weights is None:
        raise MissingWeights("panel carries no weights; attach them with with_weights()")
    return TimeSeries("aggregate", p.years, p.weights @ p.values, p.units_label)


def autocorrelation(s: TimeSeries, max_lag: int) -> Correlogram:
    """Sample autocorrelations at lags 1..max_lag.

    Deviations are taken from the full-sample mean and every lag shares the
    lag-0 denominator (the standard correlogram convention). The companion
    null band is 1/sqrt(T).
    """
    T = len(s)
    if max_lag < 1:
        raise ValueError("max_lag must be at least 1")
    if max_lag >= T:
        raise LagTooLarge(f"max_lag {max_lag} must be smaller than the sample size {T}")
    x = s.values - s.values.mean()
    denom = float(x @ x)
    if denom == 0.0:
        vals = np.zeros(max_lag)
    else:
        vals = np.array([float(x[k:] @ x[:-k]) / denom for k in range(1, max_lag + 1)])
    return Correlogram(np.arange(1, max_lag + 1), vals, 1.0 / np.sqrt(T))
