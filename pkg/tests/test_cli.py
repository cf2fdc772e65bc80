import json
import subprocess
import sys

import numpy as np
import pandas as pd
import pytest
from click.testing import CliRunner

from freqpanel.cli import cli
from freqpanel.ingest import write_long_csv, write_nclimdiv
from freqpanel.sample import sample_growth_panel, sample_temperature_panel, sample_weights
from freqpanel.series import Panel


@pytest.fixture(scope="module")
def sample_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("sample")
    temp = sample_temperature_panel(n_units=6)
    growth = sample_growth_panel(n_units=6)
    write_long_csv(temp, d / "temp.csv")
    write_long_csv(growth, d / "growth.csv")
    w = sample_weights(n_units=6)
    pd.DataFrame({"unit": list(w), "weight": list(w.values())}).to_csv(
        d / "weights.csv", index=False
    )
    return d


def invoke(args):
    return CliRunner().invoke(cli, [str(a) for a in args], catch_exceptions=False)


class TestDecompose:
    def test_additivity_and_artifacts(self, sample_dir, tmp_path):
        res = invoke(
            ["--output-dir", tmp_path, "decompose", "--method", "mw", "--q", "8",
             "--input", sample_dir / "temp.csv"]
        )
        assert res.exit_code == 0
        df = pd.read_csv(tmp_path / "decomposition.csv")
        assert list(df.columns) == ["unit", "year", "value", "low", "high"]
        assert np.abs(df.low + df.high - df.value).max() <= 1e-10
        meta = json.loads((tmp_path / "decompose_meta.json").read_text())
        assert meta["config"]["q"] == 8 and "version" in meta

    @pytest.mark.parametrize("method", ["hp", "bhp", "jh"])
    def test_other_methods(self, sample_dir, tmp_path, method):
        res = invoke(
            ["--output-dir", tmp_path, "decompose", "--method", method,
             "--input", sample_dir / "temp.csv"]
        )
        assert res.exit_code == 0
        df = pd.read_csv(tmp_path / "decomposition.csv")
        assert np.abs(df.low + df.high - df.value).max() <= 1e-8


class TestPanel:
    def test_ife_bootstrap_deterministic(self, sample_dir, tmp_path):
        args = ["--output-dir", tmp_path, "panel", "--x", sample_dir / "temp.csv",
                "--y", sample_dir / "growth.csv", "--weights", sample_dir / "weights.csv",
                "--model", "ife", "--dynamic", "--boot", "199", "--seed", "7",
                "--q", "4"]
        assert invoke(args).exit_code == 0
        first = (tmp_path / "panel_estimates.json").read_bytes()
        assert invoke(args).exit_code == 0
        second = (tmp_path / "panel_estimates.json").read_bytes()
        assert first == second
        payload = json.loads(first)
        assert payload["model"] == "ife"
        assert "b_L" in payload["coefficients"]
        assert "long_run_effect" in payload
        ci90 = payload["bootstrap"]["ci"]["90"]["b_L"]
        ci68 = payload["bootstrap"]["ci"]["68"]["b_L"]
        assert ci90[0] <= ci68[0] <= ci68[1] <= ci90[1]

    def test_fe_table_has_clustered_ses(self, sample_dir, tmp_path):
        res = invoke(
            ["--output-dir", tmp_path, "panel", "--x", sample_dir / "temp.csv",
             "--y", sample_dir / "growth.csv", "--model", "fe", "--boot", "0", "--q", "4"]
        )
        assert res.exit_code == 0
        payload = json.loads((tmp_path / "panel_estimates.json").read_text())
        assert "se_1way" in payload and "se_2way" in payload

    def test_interaction(self, sample_dir, tmp_path):
        res = invoke(
            ["--output-dir", tmp_path, "panel", "--x", sample_dir / "temp.csv",
             "--y", sample_dir / "growth.csv", "--model", "ife", "--interact",
             "--boot", "0", "--q", "4"]
        )
        assert res.exit_code == 0
        payload = json.loads((tmp_path / "panel_estimates.json").read_text())
        assert "beta_HL" in payload["coefficients"]
        assert len(payload["marginal_effects"]["of_high"]) == len(
            payload["marginal_effects"]["years"]
        )


class TestOtherCommands:
    def test_ingest_nclimdiv_and_growth(self, tmp_path, rng):
        years = np.arange(1990, 2000)
        values = np.round(rng.uniform(40, 70, (3, 10)), 2)
        src = Panel(("AL", "CA", "NY"), years, values, None, "degF")
        raw = tmp_path / "climdiv.txt"
        raw.write_text(write_nclimdiv(src))
        res = invoke(["--output-dir", tmp_path, "ingest", "--source", "nclimdiv",
                      "--input", raw, "--out", "t.csv"])
        assert res.exit_code == 0
        df = pd.read_csv(tmp_path / "t.csv")
        assert set(df.unit) == {"AL", "CA", "NY"}

        levels = tmp_path / "levels.csv"
        write_long_csv(Panel(("a", "b"), years, np.exp(rng.standard_normal((2, 10)))), levels)
        res = invoke(["--output-dir", tmp_path, "ingest", "--source", "csv",
                      "--input", levels, "--growth", "--out", "g.csv"])
        assert res.exit_code == 0
        assert pd.read_csv(tmp_path / "g.csv").year.min() == 1991

    def test_factors(self, sample_dir, tmp_path):
        res = invoke(["--output-dir", tmp_path, "factors", "--x", sample_dir / "temp.csv",
                      "--y", sample_dir / "growth.csv", "--q", "4"])
        assert res.exit_code == 0
        loadings = pd.read_csv(tmp_path / "factor_loadings.csv")
        assert list(loadings.columns) == ["unit", "loading_x", "loading_y", "r2"]
        path = pd.read_csv(tmp_path / "factor_path.csv")
        assert list(path.columns) == ["year", "factor"]

    def test_ts_reg_aggregate(self, sample_dir, tmp_path):
        res = invoke(["--output-dir", tmp_path, "ts-reg", "--x", sample_dir / "temp.csv",
                      "--y", sample_dir / "growth.csv", "--weights", sample_dir / "weights.csv"])
        assert res.exit_code == 0
        payload = json.loads((tmp_path / "ts_estimates.json").read_text())
        assert "aggregate" in payload and "L" in payload["aggregate"]["coefficients"]

    def test_density(self, tmp_path, rng):
        pd.DataFrame(
            {"unit": [f"u{i}" for i in range(20)], "estimate": rng.normal(-0.5, 0.2, 20)}
        ).to_csv(tmp_path / "est.csv", index=False)
        res = invoke(["--output-dir", tmp_path, "density", "--estimates", tmp_path / "est.csv"])
        assert res.exit_code == 0
        df = pd.read_csv(tmp_path / "density.csv")
        assert list(df.columns) == ["x", "f(x)"]
        summary = json.loads((tmp_path / "density_summary.json").read_text())
        assert -1.0 < summary["median"] < 0.0

    def test_uc_fit(self, tmp_path, rng):
        years = np.arange(1930, 2010)
        T = years.size
        vals = np.vstack(
            [50 + 2 * (np.arange(T) / T) ** 2 + 0.7 * rng.standard_normal(T) for _ in range(2)]
        )
        write_long_csv(Panel(("AA", "BB"), years, vals), tmp_path / "x.csv")
        res = invoke(["--output-dir", tmp_path, "uc-fit", "--input", tmp_path / "x.csv",
                      "--sigma-l", "0.2", "--p", "1"])
        assert res.exit_code == 0
        payload = json.loads((tmp_path / "uc_fit.json").read_text())
        assert len(payload["units"]) == 2
        assert all(0.51 < u["d"] < 1.49 for u in payload["units"])

    def test_mc_commands(self, tmp_path):
        res = invoke(["--output-dir", tmp_path, "mc-filters", "--reps", "3", "--seed", "1"])
        assert res.exit_code == 0
        assert (tmp_path / "mc_filters.csv").exists()
        res = invoke(["--output-dir", tmp_path, "mc-panel", "--design", "fe", "--reps", "2",
                      "--boot", "0"])
        assert res.exit_code == 0
        df = pd.read_csv(tmp_path / "mc_panel.csv")
        assert "coverage_asy1" in df.columns

    def test_mc_panel_json_config(self, tmp_path):
        cfg = {"design": "panel_fe", "replications": 2, "bootstrap_B": 0,
               "n_units": 8, "n_years": 25}
        (tmp_path / "cfg.json").write_text(json.dumps(cfg))
        res = invoke(["--output-dir", tmp_path, "mc-panel", "--config", tmp_path / "cfg.json"])
        assert res.exit_code == 0
        meta = json.loads((tmp_path / "mc_panel.json").read_text())["meta"]
        assert meta["n_units"] == 8


class TestExitCodes:
    def test_validation_error_exits_2(self, sample_dir, tmp_path):
        # aggregate ts-reg without weights is a validation failure
        proc = subprocess.run(
            [sys.executable, "-m", "freqpanel.cli"]
            + ["--output-dir", str(tmp_path), "ts-reg", "--x", str(sample_dir / "temp.csv"),
               "--y", str(sample_dir / "growth.csv")],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 2
        assert "validation error" in proc.stderr

    def test_usage_error_exits_2(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "freqpanel.cli", "decompose", "--method", "nope"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 2

    def test_success_exits_0(self, sample_dir, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "freqpanel.cli", "--output-dir", str(tmp_path),
             "decompose", "--method", "mw", "--q", "4",
             "--input", str(sample_dir / "temp.csv")],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
