"""Clustered variances, HAC standard errors, fixed-design bootstrap.

All estimators work on the transformed design stored in a PanelEstimate,
so the sandwich bread and the scores refer to the same within-transformed
data the point estimates came from.

The bootstrap holds regressors and every fitted heterogeneity term fixed
(including the interactive term), regenerates the dependent panel from
the fitted values plus resampled errors, and re-runs the full estimator
per replication. Replication b draws from a generator keyed by
(seed, b), so results are bit-identical for any worker count.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import stats

from .errors import BootstrapDegenerate, TooFewClusters
from .panel import PanelEstimate, estimate_panel

__all__ = [
    "VarianceEstimate",
    "cluster_se_oneway",
    "cluster_se_twoway",
    "newey_west_se",
    "white_se",
    "fixed_design_bootstrap",
    "default_bandwidth",
]

DEFAULT_CI_LEVELS = (0.68, 0.90)


@dataclass(frozen=True)
class VarianceEstimate:
    """Standard errors and confidence intervals under one inference scheme."""

    scheme: str
    se: dict
    vcov: np.ndarray
    ci: dict  # level -> {name: (lo, hi)}
    draws: np.ndarray | None = None

    def t_stats(self, coefficients: dict) -> dict:
        return {k: coefficients[k] / self.se[k] for k in self.se}


def _normal_ci(beta: np.ndarray, se: np.ndarray, names, levels) -> dict:
    out = {}
    for level in levels:
        zq = stats.norm.ppf(0.5 + level / 2.0)
        out[level] = {
            n: (float(b - zq * s), float(b + zq * s)) for n, b, s in zip(names, beta, se)
        }
    return out


def _sandwich(X: np.ndarray, scores: np.ndarray) -> np.ndarray:
    bread = np.linalg.inv(X.T @ X)
    return bread @ (scores.T @ scores) @ bread


def _group_scores(X: np.ndarray, e: np.ndarray, groups: np.ndarray, n_groups: int) -> np.ndarray:
    xe = X * e[:, None]
    out = np.zeros((n_groups, X.shape[1]))
    np.add.at(out, groups, xe)
    return out


def _cluster_axes(est: PanelEstimate) -> tuple[np.ndarray, np.ndarray, int, int]:
    N = est.spec.dependent.n_units
    T = est.spec.dependent.n_years
    unit_idx = np.repeat(np.arange(N), T)
    year_idx = np.tile(np.arange(T), N)
    return unit_idx, year_idx, N, T


def _df_k(est: PanelEstimate) -> int:
    return len(est.names) + est.n_absorbed()


def cluster_se_oneway(
    est: PanelEstimate, levels=DEFAULT_CI_LEVELS, small_sample: bool = True
) -> VarianceEstimate:
    """Sandwich variance with scores summed within units.

    The small-sample factor is G/(G-1) * (n-1)/(n-k), with k counting the
    slopes plus the absorbed heterogeneity parameters.
    """
    unit_idx, _, N, T = _cluster_axes(est)
    if N < 2:
        raise TooFewClusters("need at least 2 units to cluster by unit")
    X = est.design
    e = est.residuals.values.ravel()
    V = _sandwich(X, _group_scores(X, e, unit_idx, N))
    if small_sample:
        n, k = X.shape[0], _df_k(est)
        V = V * (N / (N - 1)) * ((n - 1) / max(n - k, 1))
    se = np.sqrt(np.diag(V))
    return VarianceEstimate(
        scheme="oneway_unit",
        se={n_: float(s) for n_, s in zip(est.names, se)},
        vcov=V,
        ci=_normal_ci(est.beta, se, est.names, levels),
    )


def _psd_repair(V: np.ndarray) -> np.ndarray:
    w, Q = np.linalg.eigh(V)
    if w.min() >= 0:
        return V
    return (Q * np.clip(w, 0.0, None)) @ Q.T


def cluster_se_twoway(
    est: PanelEstimate, levels=DEFAULT_CI_LEVELS, small_sample: bool = True
) -> VarianceEstimate:
    """Two-way clustered variance: V_unit + V_year - V_intersection.

    Each component gets its own G/(G-1) * (n-1)/(n-k) factor when
    `small_sample` is on. The intersection clusters are the (unit, year)
    cells, which in a rectangular panel make that term the plain
    heteroskedasticity-robust variance. Negative eigenvalues of the
    combined matrix are clipped to zero.
    """
    unit_idx, year_idx, N, T = _cluster_axes(est)
    if N < 2 or T < 2:
        raise TooFewClusters("need at least 2 units and 2 years")
    X = est.design
    e = est.residuals.values.ravel()
    n, k = X.shape[0], _df_k(est)

    def corr(G):
        return (G / (G - 1)) * ((n - 1) / max(n - k, 1)) if small_sample else 1.0

    V_u = _sandwich(X, _group_scores(X, e, unit_idx, N)) * corr(N)
    V_t = _sandwich(X, _group_scores(X, e, year_idx, T)) * corr(T)
    V_i = _sandwich(X, X * e[:, None]) * corr(n)
    V = _psd_repair(V_u + V_t - V_i)
    se = np.sqrt(np.diag(V))
    return VarianceEstimate(
        scheme="twoway",
        se={n_: float(s) for n_, s in zip(est.names, se)},
        vcov=V,
        ci=_normal_ci(est.beta, se, est.names, levels),
    )


def default_bandwidth(T: int) -> int:
    """floor(0.75 * T^(1/3)), a deterministic plug-in for annual samples."""
    return int(np.floor(0.75 * T ** (1.0 / 3.0)))


def white_se(X: np.ndarray, residuals: np.ndarray) -> np.ndarray:
    """Heteroskedasticity-robust covariance without df adjustment."""
    return _sandwich(X, X * np.asarray(residuals)[:, None])


def newey_west_se(
    X: np.ndarray,
    residuals: np.ndarray,
    bandwidth: int,
    names=None,
    beta: np.ndarray | None = None,
    levels=DEFAULT_CI_LEVELS,
) -> VarianceEstimate:
    """Bartlett-kernel HAC sandwich for a time-series regression.

    bandwidth 0 reduces to the heteroskedasticity-robust variance exactly.
    """
    X = np.asarray(X, dtype=float)
    e = np.asarray(residuals, dtype=float)
    if bandwidth < 0:
        raise ValueError("bandwidth must be nonnegative")
    T, k = X.shape
    xe = X * e[:, None]
    S = xe.T @ xe
    for j in range(1, bandwidth + 1):
        w = 1.0 - j / (bandwidth + 1.0)
        G = xe[j:].T @ xe[:-j]
        S += w * (G + G.T)
    bread = np.linalg.inv(X.T @ X)
    V = bread @ S @ bread
    se = np.sqrt(np.diag(V))
    names = list(names) if names is not None else [f"x{i}" for i in range(k)]
    ci = (
        _normal_ci(beta, se, names, levels)
        if beta is not None
        else {lv: {} for lv in levels}
    )
    return VarianceEstimate(
        scheme=f"hac({bandwidth})",
        se={n_: float(s) for n_, s in zip(names, se)},
        vcov=V,
        ci=ci,
    )


def _replication_rng(seed, b: int) -> np.random.Generator:
    key = list(seed) if isinstance(seed, (tuple, list)) else [seed]
    return np.random.default_rng(key + [b])


def _gaussian_factor(U: np.ndarray) -> np.ndarray:
    # factor of the cross-sectional residual covariance, tolerant of
    # semidefiniteness: eigenvalue clip instead of Cholesky
    sigma = U @ U.T / U.shape[1]
    w, Q = np.linalg.eigh(sigma)
    return Q * np.sqrt(np.clip(w, 0.0, None))


def fixed_design_bootstrap(
    spec,
    est: PanelEstimate,
    B: int = 399,
    levels=DEFAULT_CI_LEVELS,
    seed=0,
    scheme: str = "resample",
    keep_draws: bool = False,
    threads: int = 1,
    **estimator_kwargs,
) -> VarianceEstimate:
    """Percentile intervals from error resampling around the fitted model.

    Regressors (including any lagged dependent variable) and the fitted
    heterogeneity stay fixed. `scheme` is "resample" (redraw whole
    cross-sectional residual vectors over time with replacement, preserving
    contemporaneous cross-unit covariance) or "gaussian" (draw errors from
    a normal with the estimated cross-sectional covariance).
    """
    if B < 99:
        raise ValueError("B must be at least 99")
    if scheme not in ("resample", "gaussian"):
        raise ValueError(f"unknown scheme {scheme!r}")
    U = est.residuals.values
    fitted = spec.dependent.values - U
    N, T = U.shape
    factor = _gaussian_factor(U) if scheme == "gaussian" else None

    def one(b: int) -> np.ndarray:
        rng = _replication_rng(seed, b)
        if scheme == "resample":
            u_star = U[:, rng.integers(0, T, T)]
        else:
            u_star = factor @ rng.standard_normal((N, T))
        y_star = spec.dependent.with_values(fitted + u_star)
        est_b = estimate_panel(replace(spec, dependent=y_star), **estimator_kwargs)
        return est_b.beta

    if threads > 1:
        from joblib import Parallel, delayed

        rows = Parallel(n_jobs=threads)(delayed(one)(b) for b in range(B))
    else:
        rows = [one(b) for b in range(B)]
    draws = np.vstack(rows)
    if not np.all(np.isfinite(draws)):
        raise BootstrapDegenerate("bootstrap produced non-finite estimates")

    names = est.names
    ci = {}
    for level in levels:
        lo = np.quantile(draws, 0.5 - level / 2.0, axis=0)
        hi = np.quantile(draws, 0.5 + level / 2.0, axis=0)
        ci[level] = {n: (float(a), float(b_)) for n, a, b_ in zip(names, lo, hi)}
    sd = draws.std(axis=0, ddof=1)
    return VarianceEstimate(
        scheme=f"boot({scheme},B={B})",
        se={n: float(s) for n, s in zip(names, sd)},
        vcov=np.cov(draws.T) if draws.shape[1] > 1 else np.array([[float(sd[0] ** 2)]]),
        ci=ci,
        draws=draws if keep_draws else None,
    )
