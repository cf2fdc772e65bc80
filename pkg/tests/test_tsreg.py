import numpy as np
import pytest

from freqpanel.errors import AxisMismatch, SampleTooShort, TooFewEstimates
from freqpanel.lowfreq import mw_decompose
from freqpanel.tsreg import ts_estimate, unit_density

from conftest import make_series


def components(rng, T=60, q=4):
    x = make_series(rng.standard_normal(T) + 0.05 * np.arange(T), unit="x")
    d = mw_decompose(x, q)
    return d.low, d.high


class TestTsEstimate:
    def test_recovers_known_slope(self, rng):
        lx, hx = components(rng)
        dy = make_series(-0.8 * lx.values + 0.1 * rng.standard_normal(60), unit="y")
        est = ts_estimate(dy, lx)
        assert est.coefficients["L"] == pytest.approx(-0.8, abs=0.05)
        lo, hi = est.hac.ci[0.90]["L"]
        assert lo <= est.coefficients["L"] <= hi

    def test_orthogonal_fast_component_leaves_slope(self, rng):
        lx, hx = components(rng)
        dy = make_series(rng.standard_normal(60), unit="y")
        b_without = ts_estimate(dy, lx).coefficients["L"]
        b_with = ts_estimate(dy, lx, hx).coefficients["L"]
        assert b_with == pytest.approx(b_without, abs=1e-8)

    def test_fwl_low_of_dependent(self, rng):
        # slope on the slow regressor equals the slope from regressing the
        # slow part of the dependent on it
        lx, _ = components(rng)
        dy = make_series(rng.standard_normal(60), unit="y")
        ly = mw_decompose(dy, 4).low
        b1 = ts_estimate(dy, lx).coefficients["L"]
        b2 = ts_estimate(ly, lx).coefficients["L"]
        assert b1 == pytest.approx(b2, abs=1e-8)

    def test_axis_mismatch(self, rng):
        lx, _ = components(rng)
        dy = make_series(rng.standard_normal(60), first_year=1900, unit="y")
        with pytest.raises(AxisMismatch):
            ts_estimate(dy, lx)

    def test_sample_too_short(self, rng):
        dy = make_series(rng.standard_normal(15))
        lx = make_series(rng.standard_normal(15))
        with pytest.raises(SampleTooShort):
            ts_estimate(dy, lx)

    def test_durbin_watson_diagnostic(self, rng):
        lx, _ = components(rng)
        dy = make_series(rng.standard_normal(60), unit="y")
        est = ts_estimate(dy, lx)
        assert 0.0 < est.durbin_watson < 4.0

    def test_dols_flag_adds_lead_lag_terms(self, rng):
        lx, _ = components(rng)
        dy = make_series(rng.standard_normal(60), unit="y")
        est = ts_estimate(dy, lx, dols_k=2)
        assert sum(n.startswith("dL[") for n in est.names) == 5
        assert est.nobs == 60 - 5


class TestUnitDensity:
    def test_degenerate_all_equal(self):
        d = unit_density(np.full(10, -0.42))
        assert d.median == pytest.approx(-0.42, abs=1e-15)
        assert d.mode == pytest.approx(-0.42, abs=1e-15)
        assert d.mean == pytest.approx(-0.42, abs=1e-15)
        assert d.bandwidth == 0.0

    def test_summary_locations(self, rng):
        x = rng.normal(-0.5, 0.3, 200)
        w = rng.uniform(0.5, 1.5, 200)
        d = unit_density(x, weights=w)
        assert d.median == pytest.approx(np.median(x))
        assert d.mean == pytest.approx(np.average(x, weights=w))
        assert abs(d.mode - (-0.5)) <= 0.15

    def test_density_integrates_to_one(self, rng):
        d = unit_density(rng.standard_normal(80))
        area = np.trapezoid(d.density, d.grid)
        assert area == pytest.approx(1.0, abs=0.01)

    def test_silverman_bandwidth_formula(self, rng):
        x = rng.standard_normal(50)
        d = unit_density(x)
        sd = x.std(ddof=1)
        iqr = np.subtract(*np.percentile(x, [75, 25]))
        expected = 0.9 * min(sd, iqr / 1.34) * 50 ** (-0.2)
        assert d.bandwidth == pytest.approx(expected, rel=1e-12)

    def test_too_few(self):
        with pytest.raises(TooFewEstimates):
            unit_density([1.0, 2.0, 3.0, 4.0])

    def test_kde_matches_direct_sum_oracle(self, rng):
        x = rng.standard_normal(30)
        d = unit_density(x, grid_size=64)
        g0 = d.grid[10]
        expected = np.mean(
            np.exp(-0.5 * ((g0 - x) / d.bandwidth) ** 2)
        ) / (d.bandwidth * np.sqrt(2 * np.pi))
        assert d.density[10] == pytest.approx(expected, rel=1e-12)
