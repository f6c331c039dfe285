"""End-to-end report pipeline for return series.

Ingests a dated CSV, builds the sign-split (and optionally lagged) design
matrix, runs coefficient estimation with extremal and normal confidence
bands, tail-index estimation with bootstrap bias correction, extrapolation
to very extreme quantiles, and writes deterministic report tables.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import norm

from . import __version__
from .data_io import SeriesTable, fmt, ingest_csv, write_csv, write_json
from .errors import ApplicabilityError, ConfigError, DataError, SolverError
from .extrapolate import ExtrapolationSpec, extrapolate_qr
from .inference import (
    StatisticSample,
    SubsampleConfig,
    _child_rngs,
    bias_correct_and_ci,
    default_subsample_size,
    extremal_subsampling_qr_matrix,
    gev_from_exponential,
    sn_scaling_regression,
)
from .powell import powell_covariance
from .qr import Dataset, QuantileFit, fit_qr, fit_qr_arrays
from .tail import estimate_gamma, hill_regression

logger = logging.getLogger(__name__)

RETURNS_MODES = ("as_is", "simple", "log")


@dataclass
class ReportConfig:
    """Everything a report run needs; env/CLI layers fill this in."""

    input_path: str
    response_column: str
    covariate_columns: list[str]
    lag: int = 1
    tau_grid: list[float] = field(default_factory=lambda: [0.05, 0.1, 0.25, 0.5])
    tail_taus: list[float] = field(default_factory=lambda: [0.01, 0.05, 0.1])
    extrapolation_taus: list[float] = field(default_factory=lambda: [0.005, 0.001, 0.0001])
    extrapolation_anchor: float = 0.05
    extrapolation_variant: str = "dekkers_de_haan"
    level: float = 0.90
    S: int = 500
    b: int | None = None
    p: int = 5
    seed: int = 0
    output_dir: str = "eqr_report"
    returns_mode: str = "as_is"
    date_column: str | None = None
    dependent: bool = True

    def __post_init__(self):
        if self.lag not in (0, 1):
            raise ConfigError("lag must be 0 (contemporaneous) or 1 (lagged design)")
        if self.returns_mode not in RETURNS_MODES:
            raise ConfigError(f"returns_mode must be one of {RETURNS_MODES}")
        for name, taus in (("tau_grid", self.tau_grid),
                           ("tail_taus", self.tail_taus),
                           ("extrapolation_taus", self.extrapolation_taus)):
            if any(not 0.0 < t < 1.0 for t in taus):
                raise ConfigError(f"{name} entries must lie in (0, 1)")
        if not 0.0 < self.level < 1.0:
            raise ConfigError("level must lie in (0, 1)")
        if not 0.0 < self.extrapolation_anchor < 0.5:
            raise ConfigError("extrapolation_anchor must lie in (0, 0.5)")
        if not self.covariate_columns:
            raise ConfigError("need at least one covariate column")


@dataclass
class ReportBundle:
    """In-memory result of a pipeline run, ready to serialize."""

    config: ReportConfig
    T: int
    b: int
    column_names: list[str]
    coefficient_rows: list[dict]
    hill_rows: list[dict]
    extrapolation_columns: dict[str, list[float]]
    extrapolation_taus: list[float]
    qr_reference: list[float]
    fitted_dates: list[str]
    fitted_qr: list[float]
    fitted_extrapolated: list[float]
    skipped: dict[str, int]


def build_design(table: SeriesTable, config: ReportConfig) -> Dataset:
    """Sign-split design matrix with optional return transform and lag.

    Each covariate ``x`` becomes the pair ``(max(x, 0), -min(x, 0))``; with
    ``lag=1`` covariates enter with a one-period lag (the first usable row
    is dropped). An intercept column is prepended.
    """
    table.require([config.response_column] + list(config.covariate_columns))
    used = [config.response_column] + [
        c for c in config.covariate_columns if c != config.response_column]
    series = {c: np.asarray(table.columns[c], dtype=float) for c in used}
    dates = list(table.dates)
    if config.returns_mode != "as_is":
        if table.n_rows < 2:
            raise DataError("need at least two rows to compute returns")
        for c in used:
            p = series[c]
            if np.any(p <= 0.0):
                raise DataError(f"column {c!r} must be positive to compute returns")
            if config.returns_mode == "simple":
                series[c] = 100.0 * (p[1:] / p[:-1] - 1.0)
            else:
                series[c] = 100.0 * np.diff(np.log(p))
        dates = dates[1:]

    y = series[config.response_column]
    cov = [series[c] for c in config.covariate_columns]
    if config.lag == 1:
        if y.size < 2:
            raise DataError("need at least two rows for a lagged design")
        y = y[1:]
        cov = [c[:-1] for c in cov]
        dates = dates[1:]

    cols = [np.ones(y.size)]
    names = ["intercept"]
    for name, x in zip(config.covariate_columns, cov):
        cols.append(np.maximum(x, 0.0))
        cols.append(-np.minimum(x, 0.0))
        names.append(f"{name}_pos")
        names.append(f"{name}_neg")
    X = np.column_stack(cols)
    try:
        return Dataset(y, X, time_index=dates, column_names=names)
    except Exception as exc:
        raise DataError(f"design construction failed: {exc}") from exc


def hill_bootstrap_inference(
    data: Dataset,
    tau_tilde: float,
    S: int = 500,
    seed: int = 0,
    level: float = 0.90,
) -> dict:
    """Bias-corrected tail index with a bootstrap percentile interval.

    Simulates fixed-design bootstrap samples from the fitted tail model,
    recomputes the regression moment estimator per sample, and treats the
    deviations from the plug-in index as the statistic's law.
    """
    fit_lo = fit_qr(data, tau_tilde)
    fit_hi = fit_qr(data, 2.0 * tau_tilde)
    xi_hat = hill_regression(data, fit_lo)
    gamma_hat = estimate_gamma(fit_lo, fit_hi, data.xbar)
    scale = data.X @ gamma_hat
    if np.any(scale <= 0.0):
        pos = scale[scale > 0.0]
        floor = 1e-6 * float(np.median(pos)) if pos.size else 1e-6
        scale = np.where(scale <= 0.0, floor, scale)
    deviations = np.empty(S)
    kept = 0
    for rng in _child_rngs(seed, S):
        ystar = gev_from_exponential(rng.standard_exponential(data.T), xi_hat) * scale
        try:
            beta_star = fit_qr_arrays(ystar, data.X, tau_tilde)
            fake_fit = QuantileFit(tau=tau_tilde, beta=beta_star, objective=0.0,
                                   n_zero_residuals=0, negative_share=0.0)
            xi_star = hill_regression(Dataset(ystar, data.X), fake_fit)
        except (ApplicabilityError, SolverError):
            continue
        deviations[kept] = xi_star - xi_hat
        kept += 1
    sample = StatisticSample(draws=deviations[:kept], S=kept, statistic="SN",
                             origin="bootstrap", seed=seed, skipped=S - kept)
    res = bias_correct_and_ci(xi_hat, sample, 1.0, level)
    return {"tau": tau_tilde, "estimate": xi_hat, "bias_corrected": res.point,
            "ci_lower": res.lower, "ci_upper": res.upper, "skipped": S - kept}


def run_pipeline(config: ReportConfig) -> ReportBundle:
    """Run estimation, inference, tail, and extrapolation stages."""
    try:
        table = ingest_csv(config.input_path, date_column=config.date_column)
    except DataError:
        raise
    data = build_design(table, config)
    b = config.b if config.b is not None else default_subsample_size(data.T)
    cfg = SubsampleConfig(b=b, S=config.S, dependent=config.dependent)
    z = float(norm.ppf(0.5 + config.level / 2.0))
    skipped: dict[str, int] = {}

    coefficient_rows = []
    for i, tau in enumerate(config.tau_grid):
        fit = fit_qr(data, tau)
        scaling = sn_scaling_regression(data, tau, p=config.p)
        matrix, n_skip = extremal_subsampling_qr_matrix(
            data, tau, cfg, statistic="SN", p=config.p, seed=config.seed + 1000 + i)
        skipped[f"subsampling_tau_{fmt(tau)}"] = n_skip
        cov = powell_covariance(data.y, data.X, fit.beta, tau)
        se = np.sqrt(np.diag(cov))
        for j, name in enumerate(data.column_names):
            sample = StatisticSample(
                draws=matrix[:, j], S=matrix.shape[0], statistic="SN",
                origin="subsampling", seed=config.seed + 1000 + i, skipped=n_skip)
            res = bias_correct_and_ci(float(fit.beta[j]), sample, scaling, config.level)
            coefficient_rows.append({
                "tau": tau, "variable": name, "estimate": float(fit.beta[j]),
                "bias_corrected": res.point, "ev_lower": res.lower,
                "ev_upper": res.upper, "normal_se": float(se[j]),
                "normal_lower": float(fit.beta[j] - z * se[j]),
                "normal_upper": float(fit.beta[j] + z * se[j]),
                "skipped_draws": n_skip,
            })

    hill_rows = []
    for i, tau in enumerate(config.tail_taus):
        row = hill_bootstrap_inference(data, tau, S=config.S,
                                       seed=config.seed + 2000 + i, level=config.level)
        skipped[f"hill_bootstrap_tau_{fmt(tau)}"] = row.pop("skipped")
        hill_rows.append(row)

    extrap_columns: dict[str, list[float]] = {}
    qr_reference: list[float] = []
    fitted_dates: list[str] = []
    fitted_qr: list[float] = []
    fitted_extrap: list[float] = []
    if config.extrapolation_taus:
        anchor = config.extrapolation_anchor
        anchor_fit = fit_qr(data, anchor)
        xi_anchor = hill_regression(data, anchor_fit)
        ref_tau = config.extrapolation_taus[0]
        qr_reference = list(fit_qr_arrays(data.y, data.X, ref_tau))
        spec0 = ExtrapolationSpec(ref_tau, anchor, xi_anchor, config.extrapolation_variant)
        second_fit = fit_qr(data, spec0.second_tau)
        for tau in config.extrapolation_taus:
            spec = ExtrapolationSpec(tau, anchor, xi_anchor, config.extrapolation_variant)
            extrap_columns[fmt(tau)] = list(extrapolate_qr(anchor_fit, second_fit, spec))
        fitted_dates = list(data.time_index) if data.time_index is not None else [
            str(i) for i in range(data.T)]
        fitted_qr = list(data.X @ np.asarray(qr_reference))
        fitted_extrap = list(data.X @ np.asarray(extrap_columns[fmt(ref_tau)]))

    return ReportBundle(
        config=config, T=data.T, b=b, column_names=list(data.column_names),
        coefficient_rows=coefficient_rows, hill_rows=hill_rows,
        extrapolation_columns=extrap_columns,
        extrapolation_taus=list(config.extrapolation_taus),
        qr_reference=qr_reference,
        fitted_dates=fitted_dates, fitted_qr=fitted_qr,
        fitted_extrapolated=fitted_extrap, skipped=skipped,
    )


def emit_report(bundle: ReportBundle, output_dir: str | Path | None = None) -> list[Path]:
    """Write the report tables and metadata; returns the written paths."""
    out = Path(output_dir if output_dir is not None else bundle.config.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_probe"
        probe.touch()
        probe.unlink()
    except OSError as exc:
        raise DataError(f"output directory not writable: {out}: {exc}") from exc

    paths = []
    coef_path = out / "coefficients.csv"
    write_csv(coef_path,
              ["tau", "variable", "estimate", "bias_corrected", "ev_lower", "ev_upper",
               "normal_se", "normal_lower", "normal_upper", "skipped_draws"],
              [[r["tau"], r["variable"], r["estimate"], r["bias_corrected"],
                r["ev_lower"], r["ev_upper"], r["normal_se"], r["normal_lower"],
                r["normal_upper"], r["skipped_draws"]] for r in bundle.coefficient_rows])
    paths.append(coef_path)

    hill_path = out / "hill_table.csv"
    write_csv(hill_path, ["tau", "estimate", "bias_corrected", "ci_lower", "ci_upper"],
              [[r["tau"], r["estimate"], r["bias_corrected"], r["ci_lower"],
                r["ci_upper"]] for r in bundle.hill_rows])
    paths.append(hill_path)

    extrap_path = out / "extrapolation_table.csv"
    tau_keys = [fmt(t) for t in bundle.extrapolation_taus]
    header = ["variable", "qr_estimate"] + [f"extrap_{k}" for k in tau_keys]
    rows = []
    if bundle.qr_reference:
        for j, name in enumerate(bundle.column_names):
            rows.append([name, bundle.qr_reference[j]]
                        + [bundle.extrapolation_columns[k][j] for k in tau_keys])
    write_csv(extrap_path, header, rows)
    paths.append(extrap_path)

    fitted_path = out / "fitted_quantiles.csv"
    write_csv(fitted_path, ["date", "qr_fit", "extrapolated_fit"],
              [[d, q, e] for d, q, e in zip(bundle.fitted_dates, bundle.fitted_qr,
                                            bundle.fitted_extrapolated)])
    paths.append(fitted_path)

    meta_path = out / "run_meta.json"
    cfg = asdict(bundle.config)
    write_json(meta_path, {
        "config": cfg,
        "T": bundle.T,
        "b": bundle.b,
        "columns": bundle.column_names,
        "skipped_draws": bundle.skipped,
        "versions": _versions(),
    })
    paths.append(meta_path)
    return paths


def _versions() -> dict:
    import numpy
    import scipy
    return {"extremalqr": __version__, "numpy": numpy.__version__,
            "scipy": scipy.__version__}
