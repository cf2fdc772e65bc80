"""Static, dynamic, and interaction panel regressions.

Unobserved heterogeneity is controlled three ways:

* "fe"  - unit intercepts, removed by within-unit demeaning;
* "afe" - unit plus year intercepts, removed by two-way demeaning;
* "ife" - unit intercepts plus a rank-r interactive term lam_i' F_t,
          estimated by alternating least squares: given the coefficients,
          the interactive term is the rank-r principal-component fit of
          the residual matrix; given the term, coefficients come from OLS.

The dynamic specification regresses growth on its own lag, the slow
component, the change in the fast component and the lagged fast
component. Estimated components are merged onto the regression years, so
they may come from a longer sample than the dependent panel.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AxisMismatch, ExplosiveDynamics, RankDeficientDesign
from .series import Panel

__all__ = [
    "PanelSpec",
    "PanelEstimate",
    "MarginalEffects",
    "build_panel_spec",
    "fe_estimate",
    "afe_estimate",
    "ife_estimate",
    "estimate_panel",
    "nonlinear_estimate",
    "long_run_effect",
]

IFE_TOL = 1e-8
IFE_MAX_ITER = 1000


@dataclass(frozen=True)
class PanelSpec:
    """Dependent panel, named regressor panels, and the heterogeneity control."""

    dependent: Panel
    regressors: dict
    heterogeneity: str
    r: int = 1
    dynamic: bool = False
    interaction: bool = False

    def __post_init__(self):
        if self.heterogeneity not in ("fe", "afe", "ife"):
            raise ValueError(f"unknown heterogeneity tag {self.heterogeneity!r}")
        if self.r < 1:
            raise ValueError("factor rank r must be at least 1")
        y = self.dependent
        for name, p in self.regressors.items():
            if not np.array_equal(p.years, y.years) or p.unit_ids != y.unit_ids:
                raise AxisMismatch(f"regressor {name!r} is not on the dependent panel's axes")

    @property
    def names(self) -> list:
        return list(self.regressors.keys())


@dataclass(frozen=True)
class PanelEstimate:
    """Point estimates plus everything inference needs to resume work."""

    spec: PanelSpec
    coefficients: dict
    residuals: Panel
    fitted_heterogeneity: dict
    iterations: int
    objective: float
    converged: bool
    design: np.ndarray = field(repr=False)  # transformed regressors, (N*T, k)
    objective_path: np.ndarray = field(repr=False, default=None)

    @property
    def names(self) -> list:
        return list(self.coefficients.keys())

    @property
    def beta(self) -> np.ndarray:
        return np.array([self.coefficients[k] for k in self.names])

    def fitted(self) -> Panel:
        return self.spec.dependent.with_values(
            self.spec.dependent.values - self.residuals.values
        )

    def n_absorbed(self) -> int:
        """Parameters absorbed by the heterogeneity terms, for df corrections."""
        N = self.spec.dependent.n_units
        T = self.spec.dependent.n_years
        tag = self.spec.heterogeneity
        if tag == "fe":
            return N
        if tag == "afe":
            return N + T - 1
        r = self.spec.r
        return N + r * (N + T) - r * r


@dataclass(frozen=True)
class MarginalEffects:
    """Per-year marginal effects implied by the interaction coefficient."""

    years: np.ndarray
    of_high: np.ndarray  # beta_H + beta_HxL * cross-sectional mean of L_t
    of_low: np.ndarray  # beta_L + beta_HxL * cross-sectional mean of H_t


def _merge_onto(p: Panel, years: np.ndarray, unit_ids, name: str) -> Panel:
    if tuple(unit_ids) != p.unit_ids:
        try:
            p = p.subset_units(tuple(unit_ids))
        except KeyError:
            raise AxisMismatch(f"panel {name!r} lacks required units") from None
    if years[0] < p.years[0] or years[-1] > p.years[-1]:
        raise AxisMismatch(
            f"panel {name!r} covers {p.years[0]}-{p.years[-1]}, "
            f"need {years[0]}-{years[-1]}"
        )
    return p.window(int(years[0]), int(years[-1]))


def build_panel_spec(
    dy: Panel,
    low: Panel,
    high: Panel | None = None,
    heterogeneity: str = "fe",
    dynamic: bool = False,
    interaction: bool = False,
    r: int = 1,
) -> PanelSpec:
    """Assemble the regression spec from growth and component panels.

    Static: growth on the slow component (plus the fast one when given,
    plus their uncentered product under `interaction`). Dynamic: growth on
    its own lag, the slow component, the first difference of the fast
    component and its lag; the first usable year is dropped.
    """
    units = dy.unit_ids
    if dynamic:
        if high is None:
            raise ValueError("the dynamic specification needs the fast component")
        first = max(int(dy.years[0]) + 1, int(high.years[0]) + 1, int(low.years[0]))
        years = dy.years[dy.years >= first]
        if years.size < 3:
            raise AxisMismatch("too few usable years for the dynamic specification")
        dep = dy.window(int(years[0]), int(years[-1]))
        lag_y = dy.window(int(years[0]) - 1, int(years[-1]) - 1)
        h_now = _merge_onto(high, years, units, "high")
        h_lag = _merge_onto(
            high, years - 1, units, "high"
        )
        regs = {
            "dY_lag": dep.with_values(lag_y.values),
            "L": _merge_onto(low, years, units, "low"),
            "dH": dep.with_values(h_now.values - h_lag.values),
            "H_lag": dep.with_values(h_lag.values),
        }
    else:
        years = dy.years
        dep = dy
        regs = {"L": _merge_onto(low, years, units, "low")}
        if high is not None:
            regs["H"] = _merge_onto(high, years, units, "high")
    if interaction:
        if high is None:
            raise ValueError("the interaction term needs the fast component")
        if "H" not in regs:
            regs["H"] = _merge_onto(high, years, units, "high")
        regs["HxL"] = dep.with_values(regs["H"].values * regs["L"].values)
    return PanelSpec(
        dependent=dep,
        regressors=regs,
        heterogeneity=heterogeneity,
        r=r,
        dynamic=dynamic,
        interaction=interaction,
    )


def _within_unit(v: np.ndarray) -> np.ndarray:
    return v - v.mean(axis=1, keepdims=True)


def _within_twoway(v: np.ndarray) -> np.ndarray:
    return v - v.mean(axis=1, keepdims=True) - v.mean(axis=0, keepdims=True) + v.mean()


def _check_rank(X: np.ndarray) -> None:
    s = np.linalg.svd(X, compute_uv=False)
    if s.size == 0 or s[-1] <= 1e-10 * max(s[0], 1.0):
        raise RankDeficientDesign(
            "transformed design is rank deficient; a regressor is absorbed "
            "by the heterogeneity terms"
        )


def _ols(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    _check_rank(X)
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    return beta


def _linear_within(spec: PanelSpec, transform) -> PanelEstimate:
    Y = spec.dependent.values
    names = spec.names
    Xp = [spec.regressors[k].values for k in names]
    yt = transform(Y).ravel()
    X = np.column_stack([transform(x).ravel() for x in Xp])
    beta = _ols(X, yt)
    e = yt - X @ beta
    E = e.reshape(Y.shape)
    partial = Y - sum(b * x for b, x in zip(beta, Xp))
    het = {"gamma": partial.mean(axis=1)}
    if transform is _within_twoway:
        mu = partial.mean()
        het = {
            "mu": mu,
            "gamma": partial.mean(axis=1) - mu,
            "xi": partial.mean(axis=0) - mu,
        }
    return PanelEstimate(
        spec=spec,
        coefficients={k: float(b) for k, b in zip(names, beta)},
        residuals=spec.dependent.with_values(E),
        fitted_heterogeneity=het,
        iterations=1,
        objective=float(e @ e),
        converged=True,
        design=X,
        objective_path=np.array([float(e @ e)]),
    )


def fe_estimate(spec: PanelSpec) -> PanelEstimate:
    """Within (unit-demeaned) least squares on the pooled sample."""
    return _linear_within(spec, _within_unit)


def afe_estimate(spec: PanelSpec) -> PanelEstimate:
    """Two-way within least squares (unit and year intercepts)."""
    return _linear_within(spec, _within_twoway)


def _rank_r_term(W: np.ndarray, r: int) -> tuple[np.ndarray, np.ndarray]:
    """Best rank-r fit lam @ F of W with F F'/T = I_r and the sign convention."""
    if not np.any(W):
        T = W.shape[1]
        return np.zeros((W.shape[0], r)), np.zeros((r, T))
    U, s, Vt = np.linalg.svd(W, full_matrices=False)
    T = W.shape[1]
    F = np.sqrt(T) * Vt[:r]
    lam = U[:, :r] * (s[:r] / np.sqrt(T))
    profile = W.mean(axis=0)
    for j in range(r):
        if F[j] @ profile < 0:
            F[j] = -F[j]
            lam[:, j] = -lam[:, j]
    return lam, F


def ife_estimate(
    spec: PanelSpec,
    tol: float = IFE_TOL,
    max_iter: int = IFE_MAX_ITER,
) -> PanelEstimate:
    """Interactive-effects estimator with unit intercepts.

    Data are within-unit demeaned first (so unit effects are absorbed and
    the extracted factor is automatically mean zero), then coefficients and
    the rank-r term are updated in turn from the FE starting point until
    the coefficient change falls below `tol` in the sup norm. When the
    iteration cap binds, the last iterate is returned flagged via
    ``converged=False``.
    """
    Y = spec.dependent.values
    names = spec.names
    Xp = [spec.regressors[k].values for k in names]
    Yd = _within_unit(Y)
    Xd = [_within_unit(x) for x in Xp]
    X = np.column_stack([x.ravel() for x in Xd])
    _check_rank(X)
    XtX = X.T @ X
    Xt = X.T

    beta = np.linalg.solve(XtX, Xt @ Yd.ravel())
    ssr_path = []
    lam = F = None
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        W = Yd - sum(b * x for b, x in zip(beta, Xd))
        lam, F = _rank_r_term(W, spec.r)
        resid_target = Yd - lam @ F
        beta_new = np.linalg.solve(XtX, Xt @ resid_target.ravel())
        e = resid_target.ravel() - X @ beta_new
        ssr_path.append(float(e @ e))
        if np.abs(beta_new - beta).max() <= tol:
            beta = beta_new
            converged = True
            break
        beta = beta_new

    E = (Yd - lam @ F - sum(b * x for b, x in zip(beta, Xd))).reshape(Y.shape)
    partial = Y - sum(b * x for b, x in zip(beta, Xp))
    het = {"gamma": partial.mean(axis=1), "lam": lam, "F": F}
    return PanelEstimate(
        spec=spec,
        coefficients={k: float(b) for k, b in zip(names, beta)},
        residuals=spec.dependent.with_values(E),
        fitted_heterogeneity=het,
        iterations=it,
        objective=ssr_path[-1],
        converged=converged,
        design=X,
        objective_path=np.asarray(ssr_path),
    )


_ESTIMATORS = {"fe": fe_estimate, "afe": afe_estimate, "ife": ife_estimate}


def estimate_panel(spec: PanelSpec, **kwargs) -> PanelEstimate:
    """Dispatch to the estimator named by ``spec.heterogeneity``."""
    return _ESTIMATORS[spec.heterogeneity](spec, **kwargs)


def long_run_effect(b_L: float, alpha: float) -> float:
    """Cumulated response to a sustained unit change: b_L / (1 - alpha)."""
    if abs(alpha) >= 1.0:
        raise ExplosiveDynamics(f"|alpha| = {abs(alpha):g} >= 1")
    return b_L / (1.0 - alpha)


def nonlinear_estimate(spec: PanelSpec, **kwargs) -> tuple[PanelEstimate, MarginalEffects]:
    """Interaction fit plus the implied per-year marginal effects.

    The marginal effect of the fast component at year t is
    beta_H + beta_HxL * mean_i(L_it); symmetrically for the slow one.
    """
    if not spec.interaction or "HxL" not in spec.regressors:
        raise ValueError("spec must include the interaction regressor")
    est = estimate_panel(spec, **kwargs)
    lbar = spec.regressors["L"].values.mean(axis=0)
    hbar = spec.regressors["H"].values.mean(axis=0)
    b = est.coefficients
    me = MarginalEffects(
        years=spec.dependent.years,
        of_high=b["H"] + b["HxL"] * lbar,
        of_low=b["L"] + b["HxL"] * hbar,
    )
    return est, me
