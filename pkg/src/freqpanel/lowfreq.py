"""Nonparametric trend extractors.

Four ways to split an annual series into a slow trend and the residual
fast component:

* cosine-basis projection on sqrt(2)*cos(j*pi*s), s = (t - 1/2)/T, which
  keeps periodicities above 2T/q years;
* the penalized least-squares smoother with second-difference penalty
  lambda (the classic two-sided trend filter);
* its boosted variant that re-filters the residual until an information
  criterion turns up;
* the h-step predictive regression of z_{t+h} on (1, z_t, ..., z_{t-p}),
  whose trend is the fitted value and therefore one-sided.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import QTooLarge, SampleTooShort
from .series import Decomposition, Panel, TimeSeries

__all__ = [
    "mw_basis",
    "mw_periodicity",
    "default_q",
    "mw_decompose",
    "hp_decompose",
    "bhp_decompose",
    "jh_decompose",
    "decompose_panel",
]


def mw_basis(T: int, q: int) -> np.ndarray:
    """T-by-q cosine basis; columns are mean zero and mutually orthogonal.

    psi_j(s_t) = sqrt(2) * cos(j * s_t * pi) with s_t = (t - 1/2)/T, so
    Psi'Psi = T * I_q and Psi'1 = 0 up to rounding.
    """
    if q < 1:
        raise ValueError("q must be at least 1")
    s = (np.arange(1, T + 1) - 0.5) / T
    j = np.arange(1, q + 1)
    return np.sqrt(2.0) * np.cos(np.outer(s, j) * np.pi)


def mw_periodicity(T: int, q: int) -> float:
    """Longest periodicity removed from the projection residual: 2T/q years."""
    if q < 1:
        raise ValueError("q must be at least 1")
    return 2.0 * T / q


def default_q(T: int) -> int:
    """Largest q keeping the trend periodicity above 32 years: floor(2T/32)."""
    return max(1, int(2 * T // 32))


def mw_decompose(z: TimeSeries, q: int) -> Decomposition:
    """Project on a constant plus q cosine basis functions.

    The trend is the fitted value, the fast component is the residual, and
    the two are orthogonal by construction. ``coeffs`` returns the q
    projection coefficients Psi'z / T.
    """
    T = len(z)
    if q > T / 2:
        raise QTooLarge(f"q={q} exceeds T/2={T / 2:g}")
    psi = mw_basis(T, q)
    coeffs = psi.T @ z.values / T
    low = z.values.mean() + psi @ coeffs
    return Decomposition(
        low=z.with_values(low, component="low"),
        high=z.with_values(z.values - low, component="high"),
        method="MW",
        params={"q": q},
        coeffs=coeffs,
    )


def _second_difference_matrix(T: int) -> np.ndarray:
    D = np.zeros((T - 2, T))
    for i in range(T - 2):
        D[i, i : i + 3] = (1.0, -2.0, 1.0)
    return D


def _hp_trend(values: np.ndarray, lam: float) -> np.ndarray:
    # Solve min ||z - g||^2 + lam ||D2 g||^2 via the stacked least-squares
    # form [I; sqrt(lam) D2] g ~ [z; 0]; stays accurate for lam up to ~1e12
    # where the normal equations would lose digits.
    T = values.size
    if lam == 0.0:
        return values.copy()
    D = _second_difference_matrix(T)
    A = np.vstack([np.eye(T), np.sqrt(lam) * D])
    b = np.concatenate([values, np.zeros(T - 2)])
    g, *_ = np.linalg.lstsq(A, b, rcond=None)
    return g


def hp_decompose(z: TimeSeries, lam: float) -> Decomposition:
    """Two-sided smoother trend with second-difference penalty `lam`."""
    if len(z) < 4:
        raise SampleTooShort("smoother needs at least 4 observations")
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    low = _hp_trend(z.values, lam)
    return Decomposition(
        low=z.with_values(low, component="low"),
        high=z.with_values(z.values - low, component="high"),
        method="HP",
        params={"lam": float(lam)},
    )


@lru_cache(maxsize=8)
def _smoother_matrix(T: int, lam: float) -> np.ndarray:
    # cached: the boosted filter re-solves the same (T, lam) thousands of
    # times inside simulation studies; treat the result as read-only
    D = _second_difference_matrix(T)
    S = np.linalg.inv(np.eye(T) + lam * (D.T @ D))
    S.setflags(write=False)
    return S


def bhp_decompose(
    z: TimeSeries,
    lam: float,
    stopping: int | str = "bic",
    max_m: int = 100,
) -> Decomposition:
    """Boosted smoother: repeatedly re-filter the residual.

    After m passes the fast component is (I - S(lam))^m z. `stopping` is
    either a fixed integer m or "bic", which stops at the first m whose
    BIC-style criterion log(SSR_m/T) + df_m log(T)/T exceeds the previous
    one, with df_m = tr(I - (I - S)^m). The chosen m is reported in
    ``params``.
    """
    T = len(z)
    if T < 4:
        raise SampleTooShort("smoother needs at least 4 observations")
    if isinstance(stopping, str) and stopping != "bic":
        raise ValueError(f"unknown stopping rule {stopping!r}")
    if max_m < 1:
        raise ValueError("max_m must be at least 1")

    if isinstance(stopping, int):
        if stopping < 1:
            raise ValueError("fixed m must be at least 1")
        high = z.values.copy()
        for _ in range(stopping):
            high = high - _hp_trend(high, lam)
        m = stopping
    else:
        S = _smoother_matrix(T, lam)
        M = np.eye(T) - S
        high = M @ z.values
        P = M.copy()  # (I - S)^m
        best_bic = np.inf
        m = 1
        for m_try in range(1, max_m + 1):
            df = T - np.trace(P)
            ssr = float(high @ high)
            bic = np.log(max(ssr, np.finfo(float).tiny) / T) + df * np.log(T) / T
            if bic >= best_bic:
                m = m_try - 1
                break
            best_bic = bic
            best_high = high.copy()
            m = m_try
            P = P @ M
            high = M @ high
        high = best_high

    low = z.values - high
    return Decomposition(
        low=z.with_values(low, component="low"),
        high=z.with_values(high, component="high"),
        method="BHP",
        params={"lam": float(lam), "m": int(m)},
    )


def jh_decompose(z: TimeSeries, p: int = 1, h: int = 2) -> Decomposition:
    """Predictive-regression split: trend = fit of z_{t+h} on (1, z_t..z_{t-p}).

    Components exist only for the last T - p - h periods; the undefined
    prefix is excluded from the returned series rather than imputed.
    """
    T = len(z)
    if p < 0 or h < 1:
        raise ValueError("need p >= 0 and h >= 1")
    if T < p + h + 10:
        raise SampleTooShort(f"need T >= p + h + 10 = {p + h + 10}, got {T}")
    v = z.values
    n = T - p - h
    X = np.empty((n, p + 2))
    X[:, 0] = 1.0
    for k in range(p + 1):
        X[:, 1 + k] = v[p - k : p - k + n]
    y = v[p + h : p + h + n]
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    fitted = X @ beta
    years = z.years[p + h :]
    return Decomposition(
        low=TimeSeries(z.unit_id, years, fitted, z.units_label, {"component": "low"}),
        high=TimeSeries(z.unit_id, years, y - fitted, z.units_label, {"component": "high"}),
        method="JH",
        params={"p": int(p), "h": int(h), "coefficients": tuple(beta)},
    )


def decompose_panel(panel: Panel, method: str, **kwargs) -> tuple[Panel, Panel]:
    """Apply one decomposition per unit; returns (low panel, high panel).

    For the predictive-regression method the shared year axis shrinks to the
    defined suffix.
    """
    fn = {"mw": mw_decompose, "hp": hp_decompose, "bhp": bhp_decompose, "jh": jh_decompose}[
        method.lower()
    ]
    decs = [fn(s, **kwargs) for s in panel.iter_rows()]
    low = Panel.from_rows([d.low for d in decs])
    high = Panel.from_rows([d.high for d in decs])
    if panel.weights is not None:
        low = low.with_weights(panel.weights, normalize=False)
        high = high.with_weights(panel.weights, normalize=False)
    return low, high
