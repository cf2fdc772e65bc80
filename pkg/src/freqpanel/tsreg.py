"""Single-unit regressions and cross-unit estimate densities.

Growth is regressed on the slow temperature component (optionally plus the
fast one, whose orthogonality leaves the slow coefficient untouched) with
Bartlett-kernel HAC intervals. Per-unit coefficient collections are
summarized by a Gaussian kernel density with the 0.9 * min(sd, iqr/1.34)
* n^(-1/5) rule-of-thumb bandwidth.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AxisMismatch, SampleTooShort, TooFewEstimates
from .inference import VarianceEstimate, default_bandwidth, newey_west_se
from .series import TimeSeries

__all__ = ["TsEstimate", "DensityResult", "ts_estimate", "unit_density"]


@dataclass(frozen=True)
class TsEstimate:
    coefficients: dict
    hac: VarianceEstimate
    residuals: np.ndarray
    years: np.ndarray
    nobs: int
    durbin_watson: float

    @property
    def names(self) -> list:
        return list(self.coefficients.keys())


def _check_axes(*series: TimeSeries) -> None:
    years = series[0].years
    for s in series[1:]:
        if not np.array_equal(s.years, years):
            raise AxisMismatch(
                f"series {s.unit_id!r} years {s.years[0]}-{s.years[-1]} do not "
                f"match {years[0]}-{years[-1]}"
            )


def ts_estimate(
    dy: TimeSeries,
    lx: TimeSeries,
    hx: TimeSeries | None = None,
    bandwidth: int | None = None,
    levels=(0.68, 0.90),
    dols_k: int = 0,
) -> TsEstimate:
    """OLS of growth on the slow component with HAC confidence intervals.

    `dols_k` adds k leads and lags of the first difference of the slow
    component (off by default; collinearity makes the intervals very wide).
    """
    inputs = (dy, lx) if hx is None else (dy, lx, hx)
    _check_axes(*inputs)
    T = len(dy)
    if T < 20:
        raise SampleTooShort(f"need at least 20 aligned observations, got {T}")

    names = ["const", "L"]
    cols = [np.ones(T), lx.values]
    if hx is not None:
        names.append("H")
        cols.append(hx.values)
    y = dy.values
    years = dy.years
    if dols_k > 0:
        dl = np.diff(lx.values)
        rows = np.arange(dols_k, T - dols_k - 1)
        lead_lag = []
        for j in range(-dols_k, dols_k + 1):
            lead_lag.append(dl[rows + j])
            names.append(f"dL[{j:+d}]")
        keep = slice(dols_k, T - dols_k - 1)
        cols = [c[keep] for c in cols] + lead_lag
        y = y[keep]
        years = years[keep]
        T = y.size
    X = np.column_stack(cols)
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    e = y - X @ beta
    bw = default_bandwidth(T) if bandwidth is None else bandwidth
    hac = newey_west_se(X, e, bw, names=names, beta=beta, levels=levels)
    dw = float(np.sum(np.diff(e) ** 2) / np.sum(e**2)) if np.any(e) else np.nan
    return TsEstimate(
        coefficients={n: float(b) for n, b in zip(names, beta)},
        hac=hac,
        residuals=e,
        years=years,
        nobs=T,
        durbin_watson=dw,
    )


@dataclass(frozen=True)
class DensityResult:
    grid: np.ndarray
    density: np.ndarray
    bandwidth: float
    median: float
    mode: float
    mean: float  # weighted when weights are supplied

    def summary(self) -> dict:
        return {
            "median": self.median,
            "mode": self.mode,
            "weighted_mean": self.mean,
            "bandwidth": self.bandwidth,
        }


def unit_density(estimates, weights=None, grid_size: int = 512) -> DensityResult:
    """Gaussian kernel density over per-unit estimates plus location summaries.

    The density itself is unweighted; the reported mean uses the supplied
    weights. The mode is the argmax of the density on a grid spanning
    [min - 3 bw, max + 3 bw]. All-equal inputs yield the degenerate
    point-mass summary.
    """
    x = np.asarray(estimates, dtype=float)
    if x.size < 5:
        raise TooFewEstimates(f"need at least 5 estimates, got {x.size}")
    if weights is not None:
        weights = np.asarray(weights, dtype=float)
        if weights.shape != x.shape:
            raise ValueError("weights must match estimates")
        mean = float(np.average(x, weights=weights))
    else:
        mean = float(x.mean())
    median = float(np.median(x))

    sd = x.std(ddof=1)
    iqr = np.subtract(*np.percentile(x, [75, 25]))
    spread = min(sd, iqr / 1.34) if iqr > 0 else sd
    bw = 0.9 * spread * x.size ** (-0.2)
    if bw <= 1e-12 * max(1.0, float(np.abs(x).max())):
        c = float(x[0])
        return DensityResult(
            grid=np.array([c]), density=np.array([1.0]), bandwidth=0.0,
            median=c, mode=c, mean=mean,
        )
    grid = np.linspace(x.min() - 3 * bw, x.max() + 3 * bw, grid_size)
    z = (grid[:, None] - x[None, :]) / bw
    density = np.exp(-0.5 * z**2).sum(axis=1) / (x.size * bw * np.sqrt(2 * np.pi))
    mode = float(grid[np.argmax(density)])
    return DensityResult(
        grid=grid, density=density, bandwidth=float(bw), median=median, mode=mode, mean=mean
    )
