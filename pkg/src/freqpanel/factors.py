"""Principal-component factor models on raw panels and on cosine coefficients.

The one-factor representation of a panel V (N units by K columns) is
V ~ loadings @ factors with factors normalized by F F'/K = I_r and the
leading factor sign fixed so it correlates positively with the
cross-sectional mean. Applied to the per-unit cosine coefficient blocks
of temperature and growth panels, this isolates the common part of the
slow components; the remainder per unit is its idiosyncratic block.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AxisMismatch, DegenerateRank, IncompatibleAxes, QTooLarge
from .lowfreq import mw_basis
from .series import Panel, TimeSeries

__all__ = [
    "FactorModel",
    "LowfreqFactors",
    "CommonIdiosyncraticSplit",
    "first_pc",
    "lowfreq_factor_model",
    "common_idio_split",
]


@dataclass(frozen=True)
class FactorModel:
    """Rank-r principal-component fit of an N-by-K block.

    `kind` records whether the columns are calendar years ("time") or
    cosine coefficient indices ("cosine"); `years` always carries the year
    axis of the underlying data so downstream splits can check congruence.
    """

    factors: np.ndarray  # (r, K), F F'/K = I_r
    loadings: np.ndarray  # (N, r)
    r: int
    communalities: np.ndarray  # per-unit uncentered R^2
    kind: str
    years: np.ndarray
    q: int | None = None

    def mean_one(self) -> tuple[np.ndarray, np.ndarray]:
        """Loadings rescaled to cross-sectional mean 1 (factors absorb the scale)."""
        scale = self.loadings.mean(axis=0)
        if np.any(np.abs(scale) < 1e-12):
            raise DegenerateRank("cannot normalize: mean loading is zero")
        return self.loadings / scale, self.factors * scale[:, None]


@dataclass(frozen=True)
class LowfreqFactors:
    """One-factor models of the cosine blocks of two panels plus residual blocks."""

    x: FactorModel
    y: FactorModel
    ux: np.ndarray  # (N, q) idiosyncratic cosine coefficients
    uy: np.ndarray
    q: int
    years: np.ndarray


@dataclass(frozen=True)
class CommonIdiosyncraticSplit:
    low: TimeSeries
    common: TimeSeries
    idiosyncratic: TimeSeries
    mean_deviation: TimeSeries


def _rank_r_pc(V: np.ndarray, r: int) -> tuple[np.ndarray, np.ndarray]:
    """Loadings (N,r) and factors (r,K) with F F'/K = I, sign-fixed.

    Rows are processed in a canonical order by the callers so the result is
    bit-identical under unit reordering.
    """
    N, K = V.shape
    if not np.any(V):
        raise DegenerateRank("all-zero data block")
    U, s, Vt = np.linalg.svd(V, full_matrices=False)
    if s[0] <= 0 or (r > 1 and s[r - 1] <= 0):
        raise DegenerateRank(f"rank of data block below r={r}")
    F = np.sqrt(K) * Vt[:r]
    lam = V @ F.T / K
    mean_profile = V.mean(axis=0)
    for j in range(r):
        if F[j] @ mean_profile < 0:
            F[j] = -F[j]
            lam[:, j] = -lam[:, j]
    return lam, F


def _communalities(V: np.ndarray, lam: np.ndarray, F: np.ndarray) -> np.ndarray:
    resid = V - lam @ F
    total = np.einsum("ij,ij->i", V, V)
    rss = np.einsum("ij,ij->i", resid, resid)
    out = np.ones(V.shape[0])
    nz = total > 0
    out[nz] = 1.0 - rss[nz] / total[nz]
    return out


def first_pc(p: Panel, standardize: bool = False, r: int = 1) -> FactorModel:
    """Leading principal component(s) of a panel's raw second-moment structure.

    `standardize` rescales each unit to zero mean and unit variance first.
    The computation runs on rows sorted by unit id, which makes the output
    exactly invariant to the input unit order.
    """
    if p.n_units < 2 or p.n_years < 2:
        raise ValueError("need at least 2 units and 2 years")
    V = p.values
    if standardize:
        mu = V.mean(axis=1, keepdims=True)
        sd = V.std(axis=1, keepdims=True)
        if np.any(sd == 0):
            raise DegenerateRank("cannot standardize a constant unit series")
        V = (V - mu) / sd
    order = np.argsort(np.asarray(p.unit_ids), kind="stable")
    lam_sorted, F = _rank_r_pc(V[order], r)
    lam = np.empty_like(lam_sorted)
    lam[order] = lam_sorted
    return FactorModel(
        factors=F,
        loadings=lam,
        r=r,
        communalities=_communalities(V, lam, F),
        kind="time",
        years=p.years,
        q=None,
    )


def cosine_coefficients(p: Panel, q: int) -> np.ndarray:
    """Per-unit cosine projection coefficients, stacked into an N-by-q block."""
    T = p.n_years
    if q > T / 2:
        raise QTooLarge(f"q={q} exceeds T/2={T / 2:g}")
    psi = mw_basis(T, q)
    return p.values @ psi / T


def lowfreq_factor_model(x: Panel, dy: Panel, q: int, r: int = 1) -> LowfreqFactors:
    """One factor per cosine block of the two panels, plus residual blocks."""
    if not np.array_equal(x.years, dy.years):
        raise AxisMismatch("panels must share a year axis")
    if x.unit_ids != dy.unit_ids:
        raise AxisMismatch("panels must share the unit axis")
    models = []
    resids = []
    order = np.argsort(np.asarray(x.unit_ids), kind="stable")
    for p in (x, dy):
        block = cosine_coefficients(p, q)
        lam_sorted, F = _rank_r_pc(block[order], r)
        lam = np.empty_like(lam_sorted)
        lam[order] = lam_sorted
        models.append(
            FactorModel(
                factors=F,
                loadings=lam,
                r=r,
                communalities=_communalities(block, lam, F),
                kind="cosine",
                years=p.years,
                q=q,
            )
        )
        resids.append(block - lam @ F)
    return LowfreqFactors(
        x=models[0], y=models[1], ux=resids[0], uy=resids[1], q=q, years=x.years
    )


def series_loading(s: TimeSeries, model: FactorModel) -> np.ndarray:
    """Least-squares loading of one series on a fitted cosine-block factor."""
    _check_cosine_model(s, model, model.q)
    psi = mw_basis(len(s), model.q)
    coeffs = psi.T @ s.values / len(s)
    return model.factors @ coeffs / model.q


def _check_cosine_model(s: TimeSeries, model: FactorModel, q: int) -> None:
    if model.kind != "cosine":
        raise IncompatibleAxes("model was not fitted on cosine coefficient blocks")
    if model.q != q:
        raise IncompatibleAxes(f"model was fitted with q={model.q}, requested q={q}")
    if not np.array_equal(s.years, model.years):
        raise IncompatibleAxes("series year axis differs from the model's")


def common_idio_split(s: TimeSeries, model: FactorModel, q: int) -> CommonIdiosyncraticSplit:
    """Split a series' slow component into common and idiosyncratic parts.

    low = cosine trend of the series; common = (series loading on the
    fitted factor) mapped back to the time domain around the series mean;
    idiosyncratic = low - common.
    """
    _check_cosine_model(s, model, q)
    T = len(s)
    psi = mw_basis(T, q)
    mean = float(s.values.mean())
    coeffs = psi.T @ s.values / T
    lam = model.factors @ coeffs / q  # (r,)
    common_coeffs = model.factors.T @ lam
    low = mean + psi @ coeffs
    common = mean + psi @ common_coeffs
    return CommonIdiosyncraticSplit(
        low=s.with_values(low, component="low"),
        common=s.with_values(common, component="common"),
        idiosyncratic=s.with_values(low - common, component="idiosyncratic"),
        mean_deviation=s.with_values(s.values - mean, component="mean_deviation"),
    )
