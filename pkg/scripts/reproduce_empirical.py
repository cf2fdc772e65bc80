#!/usr/bin/env python3
"""Run the full empirical pipeline on user-downloaded data.

Expects the data layout documented in the README under data/:

    data/us_temperature.csv    state temperature, long CSV, degF
    data/us_gsp.csv            real GSP per capita levels, long CSV
    data/us_weights.csv        state population weights
    data/intl_temperature.csv  country temperature, long CSV, degC
    data/intl_gdp.csv          real GDP per capita levels, long CSV
    data/intl_weights.csv      country population weights

Prints the headline estimates (UC fits, panel regressions under the
three heterogeneity controls, aggregate time-series regressions) and
writes JSON artifacts next to the data.
"""
import json
import sys
from pathlib import Path

from freqpanel._threads import limit_blas_threads
from freqpanel.ingest import assemble_dataset, build_growth, read_long_csv, read_weights_csv
from freqpanel.inference import cluster_se_oneway, cluster_se_twoway, fixed_design_bootstrap
from freqpanel.lowfreq import decompose_panel
from freqpanel.panel import build_panel_spec, estimate_panel, long_run_effect
from freqpanel.series import demean_pre_cutoff, weighted_aggregate
from freqpanel.fracuc import uc_fit
from freqpanel.lowfreq import mw_decompose
from freqpanel.tsreg import ts_estimate

EUROPE = (
    "CHE", "IRL", "GBR", "FRA", "DNK", "SWE", "NLD", "ESP", "NOR", "PRT",
    "ITA", "DEU", "AUT", "FIN", "MLT", "BEL", "LUX", "CYP", "ISL", "GRC",
)


def run_panel(ds, q, label, boot=399, seed=0):
    low, high = decompose_panel(ds.temperature, "mw", q=q)
    print(f"\n== {label} (q={q}) ==")
    out = {}
    for model in ("fe", "afe", "ife"):
        for dynamic in (False, True):
            spec = build_panel_spec(ds.growth, low, high, heterogeneity=model, dynamic=dynamic)
            est = estimate_panel(spec)
            tag = f"{model}_{'dyn' if dynamic else 'static'}"
            row = dict(est.coefficients)
            if dynamic:
                row["long_run"] = long_run_effect(row["L"], row["dY_lag"])
            if model in ("fe", "afe"):
                row["se1_L"] = cluster_se_oneway(est).se["L"]
                row["se2_L"] = cluster_se_twoway(est).se["L"]
            vb = fixed_design_bootstrap(spec, est, B=boot, seed=seed)
            row["ci90_L"] = vb.ci[0.90]["L"]
            row["ci68_L"] = vb.ci[0.68]["L"]
            out[tag] = row
            print(f"  {tag:12s} " + " ".join(f"{k}={v}" if isinstance(v, tuple)
                  else f"{k}={v:+.3f}" for k, v in row.items()))
    return out


def main(data_dir: Path = Path("data"), boot: int = 399) -> int:
    limit_blas_threads(1)
    needed = ["us_temperature.csv", "us_gsp.csv", "us_weights.csv"]
    if not all((data_dir / f).exists() for f in needed):
        print(f"missing inputs under {data_dir}/ (see README); nothing to do")
        return 1
    results = {}

    x = read_long_csv(data_dir / "us_temperature.csv")
    w = read_weights_csv(data_dir / "us_weights.csv")
    y = build_growth(read_long_csv(data_dir / "us_gsp.csv"))
    ds = assemble_dataset(x, y, weights=w, cutoff=1980)

    agg = demean_pre_cutoff(weighted_aggregate(ds.temperature.with_weights(w)), 1980)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)  # pre-cutoff convention
        fit = uc_fit(agg, 0.2, p=1)
    print(f"national UC fit (sigma_L=0.2): d={fit.params.d:.3f} a1={fit.params.a[0]:.3f} "
          f"sigma_H={fit.params.sigma_H:.3f} nu={fit.params.nu:.3f}")
    results["uc_national"] = {
        "d": fit.params.d, "a1": fit.params.a[0],
        "sigma_H": fit.params.sigma_H, "nu": fit.params.nu,
    }

    results["us_panel"] = run_panel(ds, q=4, label="US panel", boot=boot)

    dec = mw_decompose(agg, 4)
    dy_agg = weighted_aggregate(ds.growth)
    est = ts_estimate(dy_agg, dec.low.window(int(dy_agg.years[0]), int(dy_agg.years[-1])))
    print(f"\nUS aggregate time series: beta_L={est.coefficients['L']:+.3f} "
          f"ci90={est.hac.ci[0.90]['L']}")
    results["us_ts"] = {"beta_L": est.coefficients["L"], "ci90": est.hac.ci[0.90]["L"]}

    intl = ["intl_temperature.csv", "intl_gdp.csv", "intl_weights.csv"]
    if all((data_dir / f).exists() for f in intl):
        xi = read_long_csv(data_dir / "intl_temperature.csv")
        wi = read_weights_csv(data_dir / "intl_weights.csv")
        yi = build_growth(read_long_csv(data_dir / "intl_gdp.csv"))
        dsi = assemble_dataset(xi, yi, weights=wi, cutoff=1980)
        results["intl_panel"] = run_panel(dsi, q=4, label="international panel", boot=boot)
        eu_units = [u for u in dsi.growth.unit_ids if u in EUROPE]
        dse = assemble_dataset(
            xi.subset_units(eu_units), yi.subset_units(eu_units),
            weights={u: wi[u] for u in eu_units}, cutoff=1980,
        )
        results["europe_panel"] = run_panel(dse, q=4, label="European panel", boot=boot)

    (data_dir / "empirical_results.json").write_text(json.dumps(results, indent=2, default=str))
    print(f"\nwrote {data_dir / 'empirical_results.json'}")
    return 0


if __name__ == "__main__":
    import argparse

    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("data_dir", nargs="?", default="data", type=Path)
    ap.add_argument("--boot", type=int, default=399)
    args = ap.parse_args()
    sys.exit(main(args.data_dir, boot=args.boot))
