"""Fractional unobserved-components model.

The observed series is the sum of a slow component driven by fractional
differencing, (1-L)^d low_t = eps_t with eps ~ (0, sigma_L^2), and a fast
component high_t = a(L) eps_t with eps ~ (0, sigma_H^2), where
a(L) = 1 + a_1 L + ... + a_p L^p. Pre-sample values are treated as zero
(truncated differencing), which makes both lag polynomials finite
triangular Toeplitz matrices over the sample.

With S the differencing matrix built from pi_j(d) and B the whitening
matrix built from b(L) = a(L)^{-1}, the conditional mean of the slow
component is

    low = (B'B + nu S'S)^{-1} B'B z,     nu = sigma_H^2 / sigma_L^2,

and the Gaussian likelihood of z uses
Cov(z) = sigma_L^2 S^{-1} S^{-T} + sigma_H^2 B^{-1} B^{-T}.

Boundary treatment of the smoother: the first ceil(d) rows of S penalize
badly truncated differences of the initial observations and pull the
trend start toward zero. They are dropped from the penalty, which treats
the initial level/slope as diffuse and makes the d = 2, a(L) = 1 case
coincide exactly with the classic second-difference-penalty smoother at
lam = nu. The likelihood keeps the full square matrices.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg as sla
from scipy import optimize

from .errors import (
    NonInvertiblePolynomial,
    OptimizerFailed,
    SingularCovariance,
    SingularSystem,
)
from .series import Decomposition, TimeSeries

__all__ = [
    "UcParams",
    "UcFit",
    "fracdiff_coeffs",
    "ma_inverse_coeffs",
    "uc_filter",
    "uc_loglik",
    "uc_fit",
    "simulate_uc",
]

D_BOX = (0.51, 1.49)  # search box for the long-memory order during fitting
SIGMA_L_RANGE = (0.01, 0.5)
D_STARTS = (0.6, 0.9, 1.1, 1.3, 1.45)


def fracdiff_coeffs(d: float, n: int) -> np.ndarray:
    """First n coefficients of (1-L)^d: pi_0 = 1, pi_j = (j-d-1)/j * pi_{j-1}.

    Exactly the signed binomial coefficients when d is a nonnegative integer.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    pi = np.empty(n)
    pi[0] = 1.0
    for j in range(1, n):
        pi[j] = (j - d - 1.0) / j * pi[j - 1]
    return pi


def ma_inverse_coeffs(a, n: int) -> np.ndarray:
    """First n coefficients of b(L) = a(L)^{-1} for a(L) = 1 + a_1 L + ... + a_p L^p.

    The convolution of a and b is (1, 0, 0, ...) by construction. Raises
    NonInvertiblePolynomial when a root of a(L) lies on or inside the unit
    circle.
    """
    a = np.asarray(a, dtype=np.float64)
    if n < 1:
        raise ValueError("n must be at least 1")
    a = np.trim_zeros(a, "b")
    p = a.size
    if p:
        if p == 1:
            stable = abs(a[0]) < 1.0
        else:
            roots = np.roots(np.r_[a[::-1], 1.0])
            stable = np.all(np.abs(roots) > 1.0)
        if not stable:
            raise NonInvertiblePolynomial(f"a(L) with coefficients {a.tolist()} has a root inside the unit circle")
    b = np.zeros(n)
    b[0] = 1.0
    for j in range(1, n):
        k = min(j, p)
        if k:
            b[j] = -np.dot(a[:k], b[j - k : j][::-1])
    return b


@dataclass(frozen=True)
class UcParams:
    """Parameters of the two-component model.

    d is the long-memory order of the slow part, sigma_L/sigma_H the
    innovation standard deviations, and `a` the moving-average coefficients
    (a_1..a_p) of the fast part. nu = sigma_H^2 / sigma_L^2.
    """

    d: float
    sigma_L: float
    sigma_H: float
    a: tuple = ()

    def __post_init__(self):
        if not -0.5 < self.d <= 2.0:
            raise ValueError(f"d={self.d} outside (-0.5, 2]")
        if self.sigma_L <= 0 or self.sigma_H <= 0:
            raise ValueError("sigma_L and sigma_H must be positive")
        object.__setattr__(self, "a", tuple(float(x) for x in self.a))
        ma_inverse_coeffs(np.asarray(self.a), 1)  # invertibility check

    @property
    def nu(self) -> float:
        return self.sigma_H**2 / self.sigma_L**2


@dataclass(frozen=True)
class FitTrace:
    """Optimizer bookkeeping: accepted-objective path and termination info."""

    iterations: int
    objective_path: np.ndarray
    converged: bool
    n_starts: int


@dataclass(frozen=True)
class UcFit:
    params: UcParams
    loglik: float
    decomposition: Decomposition
    convergence: FitTrace


def _toeplitz_lower(c: np.ndarray) -> np.ndarray:
    return sla.toeplitz(c, np.r_[c[0], np.zeros(c.size - 1)])


def _check_input(z: TimeSeries) -> np.ndarray:
    v = z.values
    if v.size < 10:
        raise ValueError("need at least 10 observations")
    sd = v.std()
    if sd > 0 and abs(v.mean()) > 1e-6 * sd:
        warnings.warn(
            f"series {z.unit_id!r} does not look demeaned "
            f"(|mean|={abs(v.mean()):.3g}); demean before filtering",
            stacklevel=3,
        )
    return v


def uc_filter(z: TimeSeries, params: UcParams) -> Decomposition:
    """Model-based split of a demeaned series into slow and fast components.

    Solves (B'B + nu S'S) low = B'B z by dense Cholesky; the fast part is
    z - low, so the two components add back to the data exactly.
    """
    v = _check_input(z)
    T = v.size
    pi = fracdiff_coeffs(params.d, T)
    S = _toeplitz_lower(pi)
    drop = min(int(np.ceil(max(params.d, 0.0))), T - 1)
    S_pen = S[drop:, :]
    b = ma_inverse_coeffs(np.asarray(params.a), T)
    B = _toeplitz_lower(b)
    BtB = B.T @ B
    G = BtB + params.nu * (S_pen.T @ S_pen)
    try:
        c, lower = sla.cho_factor(G)
        low = sla.cho_solve((c, lower), BtB @ v)
    except np.linalg.LinAlgError as e:
        raise SingularSystem(f"smoother system singular for d={params.d}, nu={params.nu:g}") from e
    return Decomposition(
        low=z.with_values(low, component="low"),
        high=z.with_values(v - low, component="high"),
        method="UC",
        params={
            "d": params.d,
            "sigma_L": params.sigma_L,
            "sigma_H": params.sigma_H,
            "a": params.a,
            "nu": params.nu,
        },
    )


def uc_loglik(z: TimeSeries, params: UcParams) -> float:
    """Exact Gaussian log-likelihood under the truncated two-component model.

    Evaluated in whitened form: with w = S z and C the Toeplitz matrix of
    the convolution of pi(d) with (1, a_1..a_p),

        loglik = -T/2 log(2 pi) - 1/2 log|V| - 1/2 w' V^{-1} w,
        V = sigma_L^2 I + sigma_H^2 C C',

    which equals the likelihood with Cov(z) = sigma_L^2 S^{-1}S^{-T}
    + sigma_H^2 B^{-1}B^{-T} because S has a unit diagonal.
    """
    v = _check_input(z)
    T = v.size
    pi = fracdiff_coeffs(params.d, T)
    w = np.convolve(pi, v)[:T]
    c_poly = np.convolve(pi, np.r_[1.0, np.asarray(params.a)])[:T]
    C = _toeplitz_lower(c_poly)
    V = params.sigma_H**2 * (C @ C.T)
    V[np.diag_indices(T)] += params.sigma_L**2
    try:
        cf = sla.cho_factor(V)
    except np.linalg.LinAlgError as e:
        raise SingularCovariance(f"covariance not positive definite for {params}") from e
    logdet = 2.0 * np.sum(np.log(np.diag(cf[0])))
    quad = float(w @ sla.cho_solve(cf, w))
    return -0.5 * (T * np.log(2.0 * np.pi) + logdet + quad)


def simulate_uc(params: UcParams, T: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Draw (low, high) paths of length T from the truncated model laws."""
    pi = fracdiff_coeffs(params.d, T)
    eps_l = rng.standard_normal(T) * params.sigma_L
    low = sla.solve_triangular(_toeplitz_lower(pi), eps_l, lower=True)
    eps_h = rng.standard_normal(T) * params.sigma_H
    high = np.convolve(eps_h, np.r_[1.0, np.asarray(params.a)])[:T]
    return low, high


def _start_sigma_h(v: np.ndarray) -> float:
    s = np.diff(v).std() / np.sqrt(2.0)
    return s if s > 0 else 1.0


def uc_fit(
    z: TimeSeries,
    sigma_L_fixed: float,
    p: int = 1,
    starts: tuple = D_STARTS,
    tol: float = 1e-8,
    max_iter: int = 2000,
) -> UcFit:
    """Profile maximum likelihood with sigma_L held fixed.

    Maximizes the likelihood over (d, sigma_H, a_1) using derivative-free
    simplex search on (d, log sigma_H, atanh a_1), multi-started on a coarse
    grid of d values. d is confined to (0.51, 1.49) during the search.
    """
    if p not in (0, 1):
        raise ValueError("p must be 0 or 1")
    if not SIGMA_L_RANGE[0] <= sigma_L_fixed <= SIGMA_L_RANGE[1]:
        raise ValueError(f"sigma_L_fixed must lie in {SIGMA_L_RANGE}")
    _check_input(z)

    lo, hi = D_BOX

    def unpack(theta: np.ndarray) -> UcParams | None:
        d = theta[0]
        if not lo < d < hi:
            return None
        a = (float(np.tanh(theta[2])),) if p == 1 else ()
        return UcParams(d=float(d), sigma_L=sigma_L_fixed, sigma_H=float(np.exp(theta[1])), a=a)

    def objective(theta: np.ndarray) -> float:
        prm = unpack(theta)
        if prm is None:
            d = theta[0]
            return 1e10 * (1.0 + min(abs(d - lo), abs(d - hi)))
        try:
            return -uc_loglik(z, prm)
        except SingularCovariance:
            return 1e10

    sh0 = np.log(_start_sigma_h(z.values))
    best = None
    best_path = None
    total_iter = 0
    converged = False
    for d0 in starts:
        theta0 = np.array([d0, sh0, np.arctanh(0.1)][: 2 + p])
        path: list[float] = []

        def tracked(theta: np.ndarray) -> float:
            val = objective(theta)
            path.append(val if not path else min(val, path[-1]))
            return val

        res = optimize.minimize(
            tracked,
            theta0,
            method="Nelder-Mead",
            options={"xatol": 1e-6, "fatol": tol, "maxiter": max_iter, "maxfev": 4 * max_iter},
        )
        total_iter += res.nit
        if np.isfinite(res.fun) and res.fun < 1e9 and (best is None or res.fun < best.fun):
            best = res
            best_path = np.asarray(path)
            converged = bool(res.success)
    if best is None:
        raise OptimizerFailed("no start produced a finite likelihood")

    params = unpack(best.x)
    loglik = -float(best.fun)
    trace = FitTrace(
        iterations=total_iter,
        objective_path=-best_path,
        converged=converged,
        n_starts=len(starts),
    )
    return UcFit(params=params, loglik=loglik, decomposition=uc_filter(z, params), convergence=trace)
