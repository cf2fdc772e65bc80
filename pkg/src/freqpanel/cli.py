"""Command-line front door.

Subcommands: ingest, decompose, uc-fit, factors, panel, ts-reg, density,
mc-filters, mc-panel. Every command writes its artifacts into
--output-dir together with a <command>_meta.json block (configuration,
seed, package version) sufficient to re-run bit-identically, and prints
an aligned summary table. Exit codes: 0 success, 2 validation/usage
error, 1 runtime error.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import pandas as pd

from . import __version__
from ._threads import limit_blas_threads
from .errors import FreqpanelError, ValidationError
from .factors import lowfreq_factor_model
from .fracuc import uc_fit
from .ingest import (
    assemble_dataset,
    build_growth,
    parse_nclimdiv,
    read_long_csv,
    read_weights_csv,
    write_long_csv,
)
from .inference import cluster_se_oneway, cluster_se_twoway, fixed_design_bootstrap
from .lowfreq import decompose_panel, default_q, mw_decompose
from .montecarlo import McConfig, mc_filter_rmse, mc_panel
from .panel import build_panel_spec, estimate_panel, long_run_effect, nonlinear_estimate
from .series import weighted_aggregate
from .tsreg import ts_estimate, unit_density

COEF_LABELS = {
    "L": "beta_L",
    "H": "beta_H",
    "HxL": "beta_HL",
    "dY_lag": "alpha",
    "dH": "delta_H",
    "H_lag": "gamma_H",
}


def _write_meta(outdir: Path, command: str, config: dict) -> None:
    meta = {"command": command, "config": config, "version": __version__}
    (outdir / f"{command}_meta.json").write_text(json.dumps(meta, indent=2, default=str))


def _echo_table(df: pd.DataFrame) -> None:
    click.echo(df.to_string(index=False))


@click.group()
@click.option(
    "--output-dir",
    type=click.Path(file_okay=False, path_type=Path),
    default=Path("."),
    show_default=True,
    help="directory for CSV/JSON artifacts",
)
@click.option(
    "--threads",
    type=int,
    envvar="FREQPANEL_THREADS",
    default=1,
    show_default=True,
    help="worker count for replication-parallel commands",
)
@click.pass_context
def cli(ctx, output_dir: Path, threads: int):
    """Frequency decomposition and panel regression toolkit."""
    limit_blas_threads(1)
    output_dir.mkdir(parents=True, exist_ok=True)
    ctx.obj = {"outdir": output_dir, "threads": threads}


@cli.command()
@click.option("--source", type=click.Choice(["nclimdiv", "csv"]), required=True)
@click.option("--input", "input_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--weights", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--cutoff", type=int, default=1980, show_default=True)
@click.option("--growth/--no-growth", default=False, help="turn levels into 100*dlog growth")
@click.option("--out", default="panel.csv", show_default=True)
@click.pass_context
def ingest(ctx, source, input_path, weights, cutoff, growth, out):
    """Parse raw files and write the canonical long CSV (unit,year,value)."""
    w = read_weights_csv(weights) if weights else None
    if source == "nclimdiv":
        panel = parse_nclimdiv(input_path.read_text(), weights=w)
    else:
        panel = read_long_csv(input_path)
    if growth:
        panel = build_growth(panel)
    out_path = ctx.obj["outdir"] / out
    write_long_csv(panel, out_path)
    _write_meta(
        ctx.obj["outdir"],
        "ingest",
        {
            "source": source,
            "input": str(input_path),
            "weights": str(weights) if weights else None,
            "cutoff": cutoff,
            "growth": growth,
            "n_units": panel.n_units,
            "years": [int(panel.years[0]), int(panel.years[-1])],
        },
    )
    click.echo(f"wrote {out_path} ({panel.n_units} units, {panel.n_years} years)")


@cli.command()
@click.option("--method", type=click.Choice(["mw", "hp", "bhp", "jh"]), required=True)
@click.option("--input", "input_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--q", type=int, default=None, help="cosine basis size (default: floor(2T/32))")
@click.option("--lambda", "lam", type=float, default=100.0, show_default=True)
@click.option("--m", type=int, default=None, help="fixed boosting passes (default: BIC stop)")
@click.option("--p", type=int, default=1, show_default=True)
@click.option("--h", type=int, default=2, show_default=True)
@click.option("--standardize", is_flag=True, help="zero-mean/unit-variance output columns")
@click.option("--out", default="decomposition.csv", show_default=True)
@click.pass_context
def decompose(ctx, method, input_path, q, lam, m, p, h, standardize, out):
    """Split every unit into low and high frequency components."""
    panel = read_long_csv(input_path)
    kwargs = {}
    if method == "mw":
        kwargs["q"] = q if q is not None else default_q(panel.n_years)
    elif method == "hp":
        kwargs["lam"] = lam
    elif method == "bhp":
        kwargs = {"lam": lam, "stopping": m if m is not None else "bic"}
    else:
        kwargs = {"p": p, "h": h}
    low, high = decompose_panel(panel, method, **kwargs)

    rows = []
    for u in low.unit_ids:
        i = panel.unit_index(u)
        j0 = panel.n_years - low.n_years
        val = panel.values[i, j0:]
        lo, hi = low.values[low.unit_index(u)], high.values[high.unit_index(u)]
        if standardize:
            scale = lo.std() if lo.std() > 0 else 1.0
            lo = (lo - lo.mean()) / scale
            hi = hi / (hi.std() if hi.std() > 0 else 1.0)
        for k, y in enumerate(low.years):
            rows.append(
                {"unit": u, "year": int(y), "value": val[k], "low": lo[k], "high": hi[k]}
            )
    df = pd.DataFrame(rows, columns=["unit", "year", "value", "low", "high"])
    out_path = ctx.obj["outdir"] / out
    df.to_csv(out_path, index=False)
    _write_meta(
        ctx.obj["outdir"], "decompose",
        {"method": method, "input": str(input_path), "standardize": standardize, **kwargs},
    )
    click.echo(f"wrote {out_path}")
    _echo_table(df.head(8))


@cli.command("uc-fit")
@click.option("--input", "input_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--sigma-l", type=float, default=0.2, show_default=True)
@click.option("--p", type=int, default=1, show_default=True)
@click.option("--cutoff", type=int, default=1980, show_default=True,
              help="demean each unit before this year prior to fitting")
@click.option("--output", default="uc_fit.json", show_default=True)
@click.pass_context
def uc_fit_cmd(ctx, input_path, sigma_l, p, cutoff, output):
    """Fit the two-component model per unit; JSON with params and trend change."""
    import warnings

    from .series import demean_pre_cutoff

    panel = read_long_csv(input_path)
    records = []
    for s in panel.iter_rows():
        z = demean_pre_cutoff(s, cutoff)
        with warnings.catch_warnings():
            # pre-cutoff demeaning leaves a nonzero full-sample mean on
            # purpose; the library-level demeaning hint is noise here
            warnings.simplefilter("ignore", UserWarning)
            fit = uc_fit(z, sigma_l, p=p)
        low = fit.decomposition.low.values
        records.append(
            {
                "unit": s.unit_id,
                "d": fit.params.d,
                "a1": fit.params.a[0] if fit.params.a else 0.0,
                "sigma_H": fit.params.sigma_H,
                "nu": fit.params.nu,
                "loglik": fit.loglik,
                "trend_change": float(low[-1] - low[0]),
                "converged": fit.convergence.converged,
            }
        )
    out_path = ctx.obj["outdir"] / output
    out_path.write_text(json.dumps({"sigma_L": sigma_l, "p": p, "units": records}, indent=2))
    _write_meta(ctx.obj["outdir"], "uc-fit",
                {"input": str(input_path), "sigma_l": sigma_l, "p": p, "cutoff": cutoff})
    df = pd.DataFrame(records)
    _echo_table(df[["unit", "d", "a1", "sigma_H", "nu", "trend_change"]].round(3))
    click.echo(f"wrote {out_path}")


@cli.command()
@click.option("--x", "x_path", type=click.Path(exists=True, path_type=Path), required=True,
              help="temperature long CSV")
@click.option("--y", "y_path", type=click.Path(exists=True, path_type=Path), required=True,
              help="growth long CSV")
@click.option("--q", type=int, default=None)
@click.option("--standardize", is_flag=True)
@click.pass_context
def factors(ctx, x_path, y_path, q, standardize):
    """One-factor model of the cosine blocks; loadings and factor path CSVs."""
    x = read_long_csv(x_path)
    y = read_long_csv(y_path)
    first = max(int(x.years[0]), int(y.years[0]))
    last = min(int(x.years[-1]), int(y.years[-1]))
    x, y = x.window(first, last), y.window(first, last)
    q = q if q is not None else default_q(x.n_years)
    lf = lowfreq_factor_model(x, y, q=q)
    lam_x, _ = lf.x.mean_one()
    lam_y, _ = lf.y.mean_one()
    loadings = pd.DataFrame(
        {
            "unit": x.unit_ids,
            "loading_x": lam_x[:, 0],
            "loading_y": lam_y[:, 0],
            "r2": lf.x.communalities,
        }
    )
    from .lowfreq import mw_basis

    path = mw_basis(x.n_years, q) @ lf.x.factors[0]
    factor_path = pd.DataFrame({"year": x.years.astype(int), "factor": path})
    outdir = ctx.obj["outdir"]
    loadings.to_csv(outdir / "factor_loadings.csv", index=False)
    factor_path.to_csv(outdir / "factor_path.csv", index=False)
    _write_meta(outdir, "factors",
                {"x": str(x_path), "y": str(y_path), "q": q, "standardize": standardize})
    _echo_table(loadings.round(3).head(10))
    click.echo(f"wrote {outdir / 'factor_loadings.csv'} and {outdir / 'factor_path.csv'}")


@cli.command()
@click.option("--x", "x_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--y", "y_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--weights", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--model", type=click.Choice(["fe", "afe", "ife"]), default="fe", show_default=True)
@click.option("--dynamic", is_flag=True)
@click.option("--interact", is_flag=True)
@click.option("--r", type=int, default=1, show_default=True)
@click.option("--q", type=int, default=None)
@click.option("--cutoff", type=int, default=1980, show_default=True)
@click.option("--boot", "boot_b", type=int, default=399, show_default=True,
              help="bootstrap replications (0 disables)")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--ci", default="68,90", show_default=True)
@click.option("--keep-draws", is_flag=True)
@click.option("--out", default="panel_estimates.json", show_default=True)
@click.pass_context
def panel(ctx, x_path, y_path, weights, model, dynamic, interact, r, q, cutoff,
          boot_b, seed, ci, keep_draws, out):
    """Panel regression of growth on estimated temperature components."""
    x = read_long_csv(x_path)
    y = read_long_csv(y_path)
    w = read_weights_csv(weights) if weights else None
    ds = assemble_dataset(x, y, weights=w, cutoff=cutoff)
    q = q if q is not None else default_q(ds.growth.n_years)
    low, high = decompose_panel(ds.temperature, "mw", q=q)
    spec = build_panel_spec(
        ds.growth, low, high, heterogeneity=model,
        dynamic=dynamic, interaction=interact, r=r,
    )
    levels = tuple(float(c) / 100 for c in ci.split(","))
    if interact:
        est, me = nonlinear_estimate(spec)
    else:
        est, me = estimate_panel(spec), None

    labels = dict(COEF_LABELS)
    if dynamic:
        labels["L"] = "b_L"
    # summary table mirrors the published layout: one row per statistic,
    # one column per coefficient
    table = {"": ["estimate"]}
    for n in est.names:
        table[labels.get(n, n)] = [f"{est.coefficients[n]:.4f}"]
    result: dict = {"model": model, "dynamic": dynamic, "interaction": interact,
                    "q": q, "coefficients": {labels.get(n, n): est.coefficients[n] for n in est.names},
                    "converged": est.converged, "iterations": est.iterations}
    if model in ("fe", "afe"):
        v1 = cluster_se_oneway(est, levels=levels)
        v2 = cluster_se_twoway(est, levels=levels)
        table[""].extend(["1way SE", "2way SE"])
        for n in est.names:
            table[labels.get(n, n)].extend([f"{v1.se[n]:.4f}", f"{v2.se[n]:.4f}"])
        result["se_1way"] = {labels.get(n, n): v1.se[n] for n in est.names}
        result["se_2way"] = {labels.get(n, n): v2.se[n] for n in est.names}
    if boot_b > 0:
        vb = fixed_design_bootstrap(
            spec, est, B=boot_b, levels=levels, seed=seed,
            keep_draws=keep_draws, threads=ctx.obj["threads"],
        )
        for lv in sorted(levels):
            table[""].append(f"CI{int(lv * 100)}")
            for n in est.names:
                lo, hi = vb.ci[lv][n]
                table[labels.get(n, n)].append(f"[{lo:.3f}, {hi:.3f}]")
        result["bootstrap"] = {
            "B": boot_b,
            "seed": seed,
            "ci": {
                str(int(lv * 100)): {labels.get(n, n): vb.ci[lv][n] for n in est.names}
                for lv in levels
            },
        }
        if keep_draws:
            result["bootstrap"]["draws"] = vb.draws.tolist()
    if dynamic and "dY_lag" in est.coefficients:
        result["long_run_effect"] = long_run_effect(
            est.coefficients["L"], est.coefficients["dY_lag"]
        )
    if me is not None:
        result["marginal_effects"] = {
            "years": me.years.astype(int).tolist(),
            "of_high": me.of_high.tolist(),
            "of_low": me.of_low.tolist(),
        }
    out_path = ctx.obj["outdir"] / out
    out_path.write_text(json.dumps(result, indent=2, default=float))
    _write_meta(ctx.obj["outdir"], "panel",
                {"x": str(x_path), "y": str(y_path), "model": model, "dynamic": dynamic,
                 "interact": interact, "r": r, "q": q, "boot": boot_b, "seed": seed, "ci": ci})
    _echo_table(pd.DataFrame(table))
    click.echo(f"wrote {out_path}")


@cli.command("ts-reg")
@click.option("--x", "x_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--y", "y_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--weights", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--q", type=int, default=None)
@click.option("--cutoff", type=int, default=1980, show_default=True)
@click.option("--aggregate/--per-unit", default=True, show_default=True)
@click.option("--with-h", is_flag=True, help="include the fast component as a regressor")
@click.option("--dols", "dols_k", type=int, default=0, show_default=True)
@click.option("--out", default="ts_estimates.json", show_default=True)
@click.pass_context
def ts_reg(ctx, x_path, y_path, weights, q, cutoff, aggregate, with_h, dols_k, out):
    """Aggregate or per-unit time-series regression with HAC intervals."""
    x = read_long_csv(x_path)
    y = read_long_csv(y_path)
    w = read_weights_csv(weights) if weights else None
    ds = assemble_dataset(x, y, weights=w, cutoff=cutoff)
    q = q if q is not None else default_q(ds.growth.n_years)

    def estimate_one(dy_series, x_series):
        dec = mw_decompose(x_series, q)
        lo = dec.low.window(int(dy_series.years[0]), int(dy_series.years[-1]))
        hi = dec.high.window(int(dy_series.years[0]), int(dy_series.years[-1]))
        return ts_estimate(dy_series, lo, hi if with_h else None, dols_k=dols_k)

    results = {}
    if aggregate:
        if ds.temperature.weights is None:
            raise ValidationError("aggregate regression needs weights (--weights)")
        est = estimate_one(weighted_aggregate(ds.growth), weighted_aggregate(ds.temperature))
        results["aggregate"] = est
    else:
        for u in ds.growth.unit_ids:
            results[u] = estimate_one(ds.growth.row(u), ds.temperature.row(u))

    payload = {
        name: {
            "coefficients": e.coefficients,
            "se": e.hac.se,
            "ci": {str(k): v for k, v in e.hac.ci.items()},
            "nobs": e.nobs,
            "durbin_watson": e.durbin_watson,
        }
        for name, e in results.items()
    }
    out_path = ctx.obj["outdir"] / out
    out_path.write_text(json.dumps(payload, indent=2, default=float))
    _write_meta(ctx.obj["outdir"], "ts-reg",
                {"x": str(x_path), "y": str(y_path), "q": q, "aggregate": aggregate,
                 "with_h": with_h, "dols": dols_k})
    rows = [{"unit": n, **e.coefficients} for n, e in results.items()]
    _echo_table(pd.DataFrame(rows).round(4).head(10))
    click.echo(f"wrote {out_path}")


@cli.command()
@click.option("--estimates", type=click.Path(exists=True, path_type=Path), required=True,
              help="CSV with columns unit,estimate[,weight]")
@click.option("--out", default="density.csv", show_default=True)
@click.pass_context
def density(ctx, estimates, out):
    """Kernel density of per-unit estimates plus a summary JSON."""
    df = pd.read_csv(estimates)
    if "estimate" not in df.columns:
        raise ValidationError("estimates CSV needs an 'estimate' column")
    w = df["weight"].to_numpy() if "weight" in df.columns else None
    d = unit_density(df["estimate"].to_numpy(), weights=w)
    outdir = ctx.obj["outdir"]
    pd.DataFrame({"x": d.grid, "f(x)": d.density}).to_csv(outdir / out, index=False)
    (outdir / "density_summary.json").write_text(json.dumps(d.summary(), indent=2))
    _write_meta(outdir, "density", {"estimates": str(estimates)})
    click.echo(json.dumps(d.summary(), indent=2))
    click.echo(f"wrote {outdir / out}")


def _mc_config(kwargs) -> McConfig:
    cfg_file = kwargs.pop("config", None)
    base = json.loads(Path(cfg_file).read_text()) if cfg_file else {}
    base.update({k: v for k, v in kwargs.items() if v is not None})
    return McConfig(**base)


@cli.command("mc-filters")
@click.option("--config", type=click.Path(exists=True), default=None, help="JSON config")
@click.option("--reps", "replications", type=int, default=None)
@click.option("--sigma-l", "sigma_L", type=float, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--out", default="mc_filters", show_default=True)
@click.pass_context
def mc_filters_cmd(ctx, out, **kwargs):
    """Filter-accuracy study on the calibrated units."""
    kwargs["threads"] = ctx.obj["threads"]
    cfg = _mc_config({**kwargs, "design": "filter_rmse"})
    report = mc_filter_rmse(cfg)
    outdir = ctx.obj["outdir"]
    report.to_frame().to_csv(outdir / f"{out}.csv", index=False)
    (outdir / f"{out}.json").write_text(json.dumps({"meta": report.meta, "rows": report.rows}, indent=2))
    _write_meta(outdir, "mc-filters", report.meta)
    _echo_table(report.to_frame().pivot(index="state", columns="method", values="rmse").round(3).reset_index())
    click.echo(f"wrote {outdir / (out + '.csv')}")


@cli.command("mc-panel")
@click.option("--config", type=click.Path(exists=True), default=None, help="JSON config")
@click.option("--design", type=click.Choice(["fe", "ife"]), default=None)
@click.option("--reps", "replications", type=int, default=None)
@click.option("--boot", "bootstrap_B", type=int, default=None)
@click.option("--sigma-l", "sigma_L", type=float, default=None)
@click.option("--q", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--out", default="mc_panel", show_default=True)
@click.pass_context
def mc_panel_cmd(ctx, out, **kwargs):
    """Estimation and coverage study for the dynamic panel designs."""
    if kwargs.get("design") is not None:
        kwargs["design"] = f"panel_{kwargs['design']}"
    kwargs["threads"] = ctx.obj["threads"]
    cfg = _mc_config(kwargs)
    if cfg.design == "filter_rmse":
        raise ValidationError("use mc-filters for the filter design")
    report = mc_panel(cfg)
    outdir = ctx.obj["outdir"]
    report.to_frame().to_csv(outdir / f"{out}.csv", index=False)
    (outdir / f"{out}.json").write_text(json.dumps({"meta": report.meta, "rows": report.rows}, indent=2))
    _write_meta(outdir, "mc-panel", report.meta)
    _echo_table(report.to_frame().round(4))
    click.echo(f"wrote {outdir / (out + '.csv')}")


def main():
    try:
        cli(standalone_mode=False)
    except click.exceptions.Abort:
        sys.exit(1)
    except click.UsageError as e:
        click.echo(f"usage error: {e.format_message()}", err=True)
        sys.exit(2)
    except ValidationError as e:
        click.echo(f"validation error: {e}", err=True)
        sys.exit(2)
    except click.exceptions.Exit as e:
        sys.exit(e.exit_code)
    except FreqpanelError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(1)
    return 0


if __name__ == "__main__":
    sys.exit(main())
