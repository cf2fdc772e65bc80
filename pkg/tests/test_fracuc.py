import numpy as np
import pytest
from scipy.linalg import toeplitz

from freqpanel.errors import NonInvertiblePolynomial, OptimizerFailed
from freqpanel.fracuc import (
    UcParams,
    fracdiff_coeffs,
    ma_inverse_coeffs,
    simulate_uc,
    uc_filter,
    uc_fit,
    uc_loglik,
)
from freqpanel.lowfreq import hp_decompose

from conftest import make_series


def lower_toeplitz(c):
    return toeplitz(c, np.r_[c[0], np.zeros(len(c) - 1)])


class TestFracdiffCoeffs:
    def test_d_zero_is_identity(self):
        np.testing.assert_array_equal(fracdiff_coeffs(0.0, 6), [1, 0, 0, 0, 0, 0])

    def test_d_one_is_first_difference(self):
        np.testing.assert_array_equal(fracdiff_coeffs(1.0, 6), [1, -1, 0, 0, 0, 0])

    def test_hand_recursion_d_04(self):
        pi = fracdiff_coeffs(0.4, 3)
        assert pi[1] == pytest.approx(-0.4, abs=1e-15)
        assert pi[2] == pytest.approx(-0.12, abs=1e-15)

    @pytest.mark.parametrize("d", [0, 1, 2])
    def test_integer_d_matches_signed_binomials_exactly(self, d):
        from math import comb

        pi = fracdiff_coeffs(float(d), 20)
        expected = np.array([(-1) ** j * comb(d, j) if j <= d else 0 for j in range(20)], dtype=float)
        assert np.array_equal(pi, expected)


class TestMaInverse:
    def test_trivial_polynomial(self):
        np.testing.assert_array_equal(ma_inverse_coeffs([], 5), [1, 0, 0, 0, 0])

    def test_geometric_inverse(self):
        b = ma_inverse_coeffs([0.5], 6)
        np.testing.assert_allclose(b, [1, -0.5, 0.25, -0.125, 0.0625, -0.03125])

    def test_convolution_identity_p2(self, rng):
        # stable a(L) built from roots outside the unit circle
        a = np.array([-0.2, -0.15])  # (1 - 0.5L)(1 + 0.3L)
        n = 40
        b = ma_inverse_coeffs(a, n)
        conv = np.convolve(np.r_[1.0, a], b)[:n]
        np.testing.assert_allclose(conv, np.r_[1.0, np.zeros(n - 1)], atol=1e-12)

    def test_non_invertible_raises(self):
        with pytest.raises(NonInvertiblePolynomial):
            ma_inverse_coeffs([1.0], 5)
        with pytest.raises(NonInvertiblePolynomial):
            ma_inverse_coeffs([-2.5, 1.0], 5)  # roots 0.5 and 2


class TestUcParams:
    def test_nu(self):
        p = UcParams(d=1.0, sigma_L=0.2, sigma_H=0.6)
        assert p.nu == pytest.approx(9.0, abs=1e-12)

    def test_validation(self):
        with pytest.raises(ValueError):
            UcParams(d=2.5, sigma_L=0.2, sigma_H=0.5)
        with pytest.raises(ValueError):
            UcParams(d=1.0, sigma_L=-0.1, sigma_H=0.5)
        with pytest.raises(NonInvertiblePolynomial):
            UcParams(d=1.0, sigma_L=0.2, sigma_H=0.5, a=(1.2,))


class TestUcFilter:
    def test_vanishing_high_variance_returns_data(self, random_series):
        z = random_series(T=60)
        p = UcParams(d=1.0, sigma_L=1.0, sigma_H=1e-8, a=(0.3,))
        d = uc_filter(z, p)
        assert np.abs(d.low.values - z.values).max() <= 1e-10
        assert np.abs(d.high.values).max() <= 1e-10

    def test_additivity(self, random_series):
        z = random_series(T=80)
        for prm in [
            UcParams(d=0.8, sigma_L=0.2, sigma_H=0.9, a=(0.4,)),
            UcParams(d=1.3, sigma_L=0.04, sigma_H=1.5),
        ]:
            d = uc_filter(z, prm)
            assert np.abs(d.low.values + d.high.values - z.values).max() <= 1e-10

    def test_against_dense_matrix_oracle(self, rng):
        # d=1, a(L)=1, nu=2, explicit matrix arithmetic at small T
        T, nu = 12, 2.0
        v = rng.standard_normal(T)
        v -= v.mean()
        z = make_series(v)
        prm = UcParams(d=1.0, sigma_L=1.0, sigma_H=np.sqrt(nu))
        got = uc_filter(z, prm)
        pi = np.r_[1.0, -1.0, np.zeros(T - 2)]
        S = lower_toeplitz(pi)[1:, :]  # first difference rows, diffuse start
        B = np.eye(T)
        M = np.linalg.inv(B.T @ B + nu * S.T @ S) @ (B.T @ B)
        np.testing.assert_allclose(got.low.values, M @ v, atol=1e-12)
        H = nu * np.linalg.inv(B.T @ B + nu * S.T @ S) @ (S.T @ S)
        np.testing.assert_allclose(got.high.values, H @ v, atol=1e-12)

    @pytest.mark.parametrize("lam", [6.25, 100.0, 1600.0])
    def test_d2_matches_second_difference_smoother(self, random_series, lam):
        z = random_series(T=60)
        prm = UcParams(d=2.0, sigma_L=1.0, sigma_H=np.sqrt(lam))
        assert np.abs(uc_filter(z, prm).low.values - hp_decompose(z, lam).low.values).max() <= 1e-6

    def test_warns_when_not_demeaned(self, rng):
        z = make_series(rng.standard_normal(30) + 50.0)
        with pytest.warns(UserWarning, match="demean"):
            uc_filter(z, UcParams(d=1.0, sigma_L=0.2, sigma_H=0.5))


class TestUcLoglik:
    def test_white_noise_reduction(self, random_series):
        z = random_series(T=50)
        sL, sH = 0.3, 0.4
        ll = uc_loglik(z, UcParams(d=0.0, sigma_L=sL, sigma_H=sH))
        s2 = sL**2 + sH**2
        iid = -0.5 * (50 * np.log(2 * np.pi * s2) + (z.values**2).sum() / s2)
        assert ll == pytest.approx(iid, abs=1e-9)

    def test_unit_relabel_invariance(self, random_series):
        z = random_series(T=40)
        z2 = make_series(z.values, unit="something-else")
        prm = UcParams(d=0.9, sigma_L=0.2, sigma_H=0.7, a=(0.2,))
        assert uc_loglik(z, prm) == uc_loglik(z2, prm)

    def test_matches_direct_covariance_formula(self, rng):
        # whitened evaluation equals the covariance-form likelihood
        T = 25
        v = rng.standard_normal(T)
        v -= v.mean()
        z = make_series(v)
        prm = UcParams(d=0.7, sigma_L=0.3, sigma_H=0.8, a=(0.25,))
        S = lower_toeplitz(fracdiff_coeffs(prm.d, T))
        B = lower_toeplitz(ma_inverse_coeffs(np.asarray(prm.a), T))
        Si, Bi = np.linalg.inv(S), np.linalg.inv(B)
        cov = prm.sigma_L**2 * Si @ Si.T + prm.sigma_H**2 * Bi @ Bi.T
        sign, logdet = np.linalg.slogdet(cov)
        direct = -0.5 * (T * np.log(2 * np.pi) + logdet + v @ np.linalg.solve(cov, v))
        assert uc_loglik(z, prm) == pytest.approx(direct, rel=1e-10)

    @pytest.mark.filterwarnings("ignore::UserWarning")
    def test_truth_beats_perturbed_d(self):
        truth = UcParams(d=1.0, sigma_L=0.2, sigma_H=0.6, a=(0.2,))
        wins = 0
        reps = 200
        for rep in range(reps):
            r = np.random.default_rng([42, rep])
            low, high = simulate_uc(truth, 500, r)
            z = make_series(low + high)
            ll = uc_loglik(z, truth)
            up = uc_loglik(z, UcParams(d=1.3, sigma_L=0.2, sigma_H=0.6, a=(0.2,)))
            dn = uc_loglik(z, UcParams(d=0.7, sigma_L=0.2, sigma_H=0.6, a=(0.2,)))
            wins += int(ll >= max(up, dn))
        assert wins / reps >= 0.90


class TestUcFit:
    @pytest.mark.filterwarnings("ignore::UserWarning")
    def test_recovers_parameters_on_one_draw(self):
        truth = UcParams(d=1.0, sigma_L=0.2, sigma_H=0.6, a=(0.2,))
        low, high = simulate_uc(truth, 500, np.random.default_rng(5))
        z = make_series(low + high)
        fit = uc_fit(z, 0.2, p=1, starts=(0.8, 1.2), tol=1e-6)
        assert abs(fit.params.d - 1.0) <= 0.25
        assert abs(fit.params.sigma_H - 0.6) <= 0.15
        assert fit.params.sigma_L == 0.2

    def test_objective_trace_monotone(self, random_series):
        z = random_series(T=60)
        fit = uc_fit(z, 0.2, p=0, starts=(0.9,), tol=1e-6)
        assert np.all(np.diff(fit.convergence.objective_path) >= 0.0)

    @pytest.mark.slow
    @pytest.mark.filterwarnings("ignore::UserWarning")
    def test_simulation_recovery_study(self):
        # median d-hat within +/-0.15 of the truth across replications
        from joblib import Parallel, delayed

        truth = UcParams(d=1.0, sigma_L=0.2, sigma_H=0.6, a=(0.2,))

        def one(rep):
            import warnings

            r = np.random.default_rng([99, rep])
            low, high = simulate_uc(truth, 500, r)
            z = make_series(low + high)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                return uc_fit(z, 0.2, p=1, starts=(0.8, 1.2), tol=1e-6).params.d

        d_hats = Parallel(n_jobs=2)(delayed(one)(rep) for rep in range(100))
        assert abs(np.median(d_hats) - 1.0) <= 0.15

    def test_validation(self, random_series):
        z = random_series(T=40)
        with pytest.raises(ValueError):
            uc_fit(z, 0.7)
        with pytest.raises(ValueError):
            uc_fit(z, 0.2, p=2)

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_optimizer_failed(self, random_series, monkeypatch):
        import freqpanel.fracuc as mod

        monkeypatch.setattr(mod, "uc_loglik", lambda *_: -np.inf)
        with pytest.raises(OptimizerFailed):
            uc_fit(random_series(T=40), 0.2, p=0, starts=(0.9,))


def test_simulate_uc_deterministic():
    prm = UcParams(d=1.1, sigma_L=0.2, sigma_H=0.8, a=(0.1,))
    a1, b1 = simulate_uc(prm, 50, np.random.default_rng(3))
    a2, b2 = simulate_uc(prm, 50, np.random.default_rng(3))
    np.testing.assert_array_equal(a1, a2)
    np.testing.assert_array_equal(b1, b2)
