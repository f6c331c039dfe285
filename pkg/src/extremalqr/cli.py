"""Command-line interface.

Subcommands mirror the pipeline stages: ``fit`` (coefficient paths),
``tails`` (tail-index table), ``inference`` (paths with extremal and normal
bands), ``extrapolate`` (very-extreme-quantile table), ``simulate``
(Monte Carlo studies), and ``report`` (everything, written to disk).
Every option can be supplied through an ``EQR_``-prefixed environment
variable. Exit codes: 0 success, 2 config error, 3 data error,
4 numerical failure.
"""

from __future__ import annotations

import sys

import click

from .data_io import fmt, ingest_csv, write_csv, write_json
from .errors import ConfigError, DataError, ExtremalQRError
from .pipeline import ReportConfig, build_design, emit_report, hill_bootstrap_inference, run_pipeline
from .qr import fit_qr
from .simulate import SimDesign, approximation_quality_study, coverage_study


def _taus(_ctx, _param, value):
    if value is None:
        return None
    try:
        taus = [float(t) for t in str(value).split(",") if t.strip()]
    except ValueError as exc:
        raise click.BadParameter(f"cannot parse quantile list {value!r}") from exc
    return taus


data_options = [
    click.option("--input", "input_path", required=True, help="CSV of dated series."),
    click.option("--response", "response_column", required=True),
    click.option("--covariates", "covariate_columns", required=True,
                 help="Comma-separated covariate column names."),
    click.option("--lag", type=click.IntRange(0, 1), default=1, show_default=True,
                 help="1 = covariates enter lagged one period."),
    click.option("--returns", "returns_mode", default="as_is", show_default=True,
                 type=click.Choice(["as_is", "simple", "log"]),
                 help="Transform price levels to returns before modeling."),
    click.option("--date-column", default=None),
]

run_options = [
    click.option("--seed", type=int, default=0, show_default=True),
    click.option("--subsamples", "S", type=int, default=500, show_default=True),
    click.option("--subsample-size", "b", type=int, default=None,
                 help="Defaults to floor(50 + sqrt(T))."),
    click.option("--spacing-p", "p", type=int, default=5, show_default=True),
    click.option("--level", type=float, default=0.90, show_default=True),
]


def add_options(options):
    def wrap(fn):
        for opt in reversed(options):
            fn = opt(fn)
        return fn
    return wrap


def _config(kwargs) -> ReportConfig:
    kwargs = dict(kwargs)
    kwargs["covariate_columns"] = [
        c.strip() for c in kwargs["covariate_columns"].split(",") if c.strip()]
    return ReportConfig(**kwargs)


@click.group(context_settings={"auto_envvar_prefix": "EQR"})
def main():
    """Extremal quantile regression toolkit."""


@main.command("fit")
@add_options(data_options)
@click.option("--taus", callback=_taus, default="0.05,0.1,0.25,0.5", show_default=True)
def fit_cmd(taus, **kwargs):
    """Print quantile-regression coefficient paths."""
    cfg = _config(dict(kwargs, tau_grid=taus))
    data = build_design(ingest_csv(cfg.input_path, date_column=cfg.date_column), cfg)
    click.echo(f"T={data.T} d_x={data.d_x}")
    header = ["tau"] + list(data.column_names)
    click.echo(",".join(header))
    for tau in taus:
        fit = fit_qr(data, tau)
        click.echo(",".join([fmt(tau)] + [fmt(v) for v in fit.beta]))


@main.command("tails")
@add_options(data_options)
@add_options(run_options)
@click.option("--taus", callback=_taus, default="0.01,0.05,0.1", show_default=True)
@click.option("--output", type=click.Path(), default=None, help="Optional CSV path.")
def tails_cmd(taus, output, **kwargs):
    """Tail-index table with bootstrap bias correction and intervals."""
    cfg = _config(dict(kwargs, tail_taus=taus))
    data = build_design(ingest_csv(cfg.input_path, date_column=cfg.date_column), cfg)
    rows = []
    for i, tau in enumerate(taus):
        row = hill_bootstrap_inference(data, tau, S=cfg.S, seed=cfg.seed + i,
                                       level=cfg.level)
        rows.append([row["tau"], row["estimate"], row["bias_corrected"],
                     row["ci_lower"], row["ci_upper"]])
    header = ["tau", "estimate", "bias_corrected", "ci_lower", "ci_upper"]
    if output:
        write_csv(output, header, rows)
        click.echo(f"wrote {output}")
    else:
        click.echo(",".join(header))
        for r in rows:
            click.echo(",".join(fmt(v) for v in r))


@main.command("inference")
@add_options(data_options)
@add_options(run_options)
@click.option("--taus", callback=_taus, default="0.05,0.1,0.25,0.5", show_default=True)
@click.option("--output-dir", default="eqr_report", show_default=True)
def inference_cmd(taus, **kwargs):
    """Coefficient paths with extremal and normal confidence bands."""
    cfg = _config(dict(kwargs, tau_grid=taus, tail_taus=[], extrapolation_taus=[]))
    bundle = run_pipeline(cfg)
    paths = emit_report(bundle)
    click.echo("\n".join(str(p) for p in paths))


@main.command("extrapolate")
@add_options(data_options)
@add_options(run_options)
@click.option("--taus", callback=_taus, default="0.005,0.001,0.0001", show_default=True)
@click.option("--anchor", type=float, default=0.05, show_default=True)
@click.option("--variant", default="dekkers_de_haan", show_default=True,
              type=click.Choice(["dekkers_de_haan", "he_et_al"]))
@click.option("--output-dir", default="eqr_report", show_default=True)
def extrapolate_cmd(taus, anchor, variant, **kwargs):
    """Extrapolation table for very extreme quantiles."""
    cfg = _config(dict(kwargs, tau_grid=[], tail_taus=[], extrapolation_taus=taus,
                       extrapolation_anchor=anchor, extrapolation_variant=variant))
    bundle = run_pipeline(cfg)
    paths = emit_report(bundle)
    click.echo("\n".join(str(p) for p in paths))


@main.command("simulate")
@click.option("--study", type=click.Choice(["approximation", "coverage"]), required=True)
@click.option("--law", default="cauchy", show_default=True)
@click.option("--xi", type=float, default=None)
@click.option("--nu", type=float, default=None)
@click.option("--T", "T", type=int, default=200, show_default=True)
@click.option("--taus", callback=_taus, default="0.025,0.2,0.3", show_default=True)
@click.option("--n-mc", type=int, default=10000, show_default=True)
@click.option("--method", default="subsampling_sn", show_default=True)
@click.option("--level", type=float, default=0.90, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--output", type=click.Path(), required=True)
def simulate_cmd(study, law, xi, nu, T, taus, n_mc, method, level, seed, output):
    """Monte Carlo studies; writes a CSV (approximation) or JSON (coverage)."""
    design = SimDesign(law=law, T=T, xi=xi, nu=nu, seed=seed)
    if study == "approximation":
        rows = approximation_quality_study(design, taus, n_mc=n_mc, seed=seed)
        header = ["tau", "order", "ev_sup", "normal_sup"]
        write_csv(output, header,
                  [[r["tau"], r["order"], r["ev_sup"], r["normal_sup"]] for r in rows])
    else:
        results = {fmt(t): coverage_study(design, method, t, level=level,
                                          n_mc=n_mc, seed=seed) for t in taus}
        write_json(output, results)
    click.echo(f"wrote {output}")


@main.command("report")
@add_options(data_options)
@add_options(run_options)
@click.option("--taus", "tau_grid", callback=_taus,
              default="0.01,0.025,0.05,0.1,0.25,0.5", show_default=True)
@click.option("--tail-taus", callback=_taus, default="0.01,0.05,0.1", show_default=True)
@click.option("--extrapolation-taus", callback=_taus, default="0.005,0.001,0.0001",
              show_default=True)
@click.option("--anchor", "extrapolation_anchor", type=float, default=0.05,
              show_default=True)
@click.option("--variant", "extrapolation_variant", default="dekkers_de_haan",
              show_default=True, type=click.Choice(["dekkers_de_haan", "he_et_al"]))
@click.option("--output-dir", default="eqr_report", show_default=True)
def report_cmd(**kwargs):
    """Full pipeline: coefficients, tails, extrapolation, fitted quantiles."""
    cfg = _config(kwargs)
    bundle = run_pipeline(cfg)
    paths = emit_report(bundle)
    click.echo("\n".join(str(p) for p in paths))


def entry() -> int:
    try:
        main.main(standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        return 2
    except click.Abort:
        return 2
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        return 2
    except DataError as exc:
        click.echo(f"data error: {exc}", err=True)
        return 3
    except ExtremalQRError as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(entry())
