"""Extrapolation to very extreme quantiles through the parametric tail model.

When the order ``tau*T`` (or ``tau*T/d_x``) of a target quantile drops
toward one, direct estimates become unreliable. These estimators anchor at
an intermediate quantile that is still well estimated and project it to the
target through the power-law tail relation. Two classical variants are
implemented, differing in whether the second anchor point sits at twice or
half the anchor index: ``"dekkers_de_haan"`` and ``"he_et_al"``. Both are
exact on noiseless power-law quantiles.

Confidence intervals come from the subsampling machinery applied to the
anchor-scaled extrapolation statistic.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import ApplicabilityError, DegenerateSpacingError, DomainError, SolverError
from .inference import (
    InferenceResult,
    SNScaling,
    StatisticSample,
    SubsampleConfig,
    _child_rngs,
    _resolve_psi,
    _subsample_indices,
    bias_correct_and_ci,
)
from .qr import Dataset, QuantileFit, design_rank_ok, fit_qr, fit_qr_arrays, sample_quantile
from .tail import hill_marginal, hill_regression, pickands_marginal

logger = logging.getLogger(__name__)

_LN2 = np.log(2.0)

VARIANTS = ("dekkers_de_haan", "he_et_al")


@dataclass(frozen=True)
class ExtrapolationSpec:
    """Target index, anchor index, tail index, and estimator variant."""

    tau_target: float
    tau_anchor: float
    xi_hat: float
    variant: str = "dekkers_de_haan"

    def __post_init__(self):
        if not (0.0 < self.tau_target < 1.0 and 0.0 < self.tau_anchor < 1.0):
            raise DomainError("quantile indexes must lie in (0, 1)")
        if self.tau_target > self.tau_anchor:
            raise DomainError("the target index must not exceed the anchor index")
        if self.variant not in VARIANTS:
            raise DomainError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if not np.isfinite(self.xi_hat):
            raise DomainError("xi_hat must be finite")

    @property
    def second_tau(self) -> float:
        """Index of the second anchor point: ``2*anchor`` or ``anchor/2``."""
        if self.variant == "dekkers_de_haan":
            return 2.0 * self.tau_anchor
        return self.tau_anchor / 2.0


def extrapolation_factor(spec: ExtrapolationSpec) -> float:
    """Multiplier applied to the anchor spacing.

    ``[(tau/anchor)^(-xi) - 1] / [2^(-xi) - 1]`` for the doubled-anchor
    variant and ``[...] / [2^xi - 1]`` for the halved-anchor variant,
    evaluated through ``expm1`` and with the exact log-ratio limit at
    ``xi = 0`` so the map is continuous in the index.
    """
    log_ratio = np.log(spec.tau_target / spec.tau_anchor)
    sign = -1.0 if spec.variant == "dekkers_de_haan" else 1.0
    if spec.xi_hat == 0.0:
        return float(-sign * log_ratio / _LN2)
    num = np.expm1(-spec.xi_hat * log_ratio)
    den = np.expm1(sign * spec.xi_hat * _LN2)
    return float(num / den)


def extrapolate_marginal(q_anchor: float, q_second: float, spec: ExtrapolationSpec) -> float:
    """Extrapolated quantile from two anchor quantile estimates.

    ``q_second`` is the estimate at ``spec.second_tau`` (twice or half the
    anchor index depending on the variant). With ``tau_target == tau_anchor``
    the anchor estimate is returned unchanged.
    """
    return float(q_anchor + extrapolation_factor(spec) * (q_second - q_anchor))


def extrapolate_qr(fit_anchor: QuantileFit, fit_second: QuantileFit,
                   spec: ExtrapolationSpec) -> np.ndarray:
    """Coefficient-wise extrapolation of regression quantile fits."""
    return fit_anchor.beta + extrapolation_factor(spec) * (fit_second.beta - fit_anchor.beta)


def extrapolation_limit_simulate(
    xi: float,
    k: float,
    k_tilde: int,
    S: int = 500,
    seed: int = 0,
) -> StatisticSample:
    """Simulate the limit law of the anchored extrapolation error ratio.

    Draws ``(k_tilde/k)^xi - 2^(-xi)) / (1 - 2^(-xi))
    + (1 - (G/k)^xi) / (e^(xi*E) - 1)`` where ``G`` is gamma with shape
    ``2*k_tilde + 1`` and ``E`` is an independent weighted exponential sum
    ``sum_{j=k_tilde+1}^{2*k_tilde} Z_j / j``. Diagnostic use only; interval
    construction goes through :func:`extrapolation_ci_subsampling`.
    """
    if xi == 0.0:
        raise DomainError("the extrapolation limit law is not supported at xi = 0")
    if not (k > 0 and k_tilde > k):
        raise DomainError("need k_tilde > k > 0")
    if int(k_tilde) != k_tilde or k_tilde < 1:
        raise DomainError("k_tilde must be a positive integer")
    k_tilde = int(k_tilde)
    first = ((k_tilde / k) ** xi - 2.0 ** (-xi)) / (1.0 - 2.0 ** (-xi))
    weights = 1.0 / np.arange(k_tilde + 1, 2 * k_tilde + 1)
    rng = np.random.default_rng(seed)
    gam = rng.standard_gamma(2 * k_tilde + 1, size=S)
    esum = rng.standard_exponential((S, k_tilde)) @ weights
    draws = first + (1.0 - (gam / k) ** xi) / np.expm1(xi * esum)
    return StatisticSample(draws=draws, S=S, statistic="CN", origin="analytical",
                           seed=seed, skipped=0)


def extrapolation_ci_subsampling(
    data: Dataset,
    spec: ExtrapolationSpec,
    cfg: SubsampleConfig,
    level: float = 0.90,
    p: int = 5,
    seed: int = 0,
    psi: np.ndarray | None = None,
    xi_estimator: str = "hill",
) -> InferenceResult:
    """Subsampling confidence interval for an extrapolated quantile.

    The scaled statistic is the extrapolation estimate normalized by the
    anchor-level self-normalizing factor. Subsample draws recompute the full
    recipe inside each subsample (anchor fits, re-estimated tail index,
    extrapolation to the subsample-adjusted target) and are recentered at
    the full-sample extrapolation evaluated at that adjusted target, which
    is the recentering that stays consistent at extreme indexes. Degenerate
    subsamples are skipped and counted.
    """
    psi_vec = _resolve_psi(psi, data.d_x)
    marginal = data.d_x == 1
    T = data.T

    anchor_fit, second_fit = _anchor_fits(data, spec, marginal)
    full_extrap = _extrap_vector(anchor_fit, second_fit, spec, marginal)
    raw = float(psi_vec @ full_extrap)

    m = (data.d_x + p) / (spec.tau_anchor * T) + 1.0
    if m * spec.tau_anchor >= 1.0:
        raise DomainError("m*tau_anchor >= 1; reduce the spacing parameter p")
    scaling = _anchor_scaling(data, spec, m, anchor_fit, marginal, p)

    ratio = spec.tau_target / spec.tau_anchor
    draws = np.empty(cfg.S)
    kept = 0
    for rng in _child_rngs(seed, cfg.S):
        rows = _subsample_indices(T, cfg, rng)
        yb = data.y[rows]
        Xb = data.X[rows]
        anchor_b = cfg.tau_b(spec.tau_anchor, T)
        target_b = ratio * anchor_b
        try:
            draw_vec, spacing = _subsample_extrap(
                yb, Xb, spec, anchor_b, target_b, m, marginal, xi_estimator)
            center = _extrap_vector(
                anchor_fit, second_fit,
                _retarget(spec, target_b), marginal)
            draws[kept] = np.sqrt(anchor_b * cfg.b) * float(
                psi_vec @ (draw_vec - center)) / spacing
        except (DomainError, ApplicabilityError, SolverError):
            continue
        kept += 1
    skipped = cfg.S - kept
    if skipped:
        logger.info("extrapolation subsampling: skipped %d replications", skipped)
    sample = StatisticSample(draws=draws[:kept], S=kept, statistic="SN",
                             origin="subsampling", seed=seed, skipped=skipped)
    return bias_correct_and_ci(raw, sample, scaling, level)


def _retarget(spec: ExtrapolationSpec, tau_target: float) -> ExtrapolationSpec:
    return ExtrapolationSpec(tau_target=tau_target, tau_anchor=spec.tau_anchor,
                             xi_hat=spec.xi_hat, variant=spec.variant)


def _anchor_fits(data: Dataset, spec: ExtrapolationSpec, marginal: bool):
    if marginal:
        return (sample_quantile(data.y, spec.tau_anchor),
                sample_quantile(data.y, spec.second_tau))
    return fit_qr(data, spec.tau_anchor), fit_qr(data, spec.second_tau)


def _extrap_vector(anchor, second, spec: ExtrapolationSpec, marginal: bool) -> np.ndarray:
    if marginal:
        return np.array([extrapolate_marginal(anchor, second, spec)])
    return extrapolate_qr(anchor, second, spec)


def _anchor_scaling(data, spec, m, anchor_fit, marginal, p) -> SNScaling:
    k = spec.tau_anchor * data.T
    if marginal:
        q_hi = sample_quantile(data.y, m * spec.tau_anchor)
        denom = q_hi - anchor_fit
    else:
        beta_hi = fit_qr_arrays(data.y, data.X, m * spec.tau_anchor)
        denom = float(data.xbar @ (beta_hi - anchor_fit.beta))
    if denom == 0.0:
        raise DegenerateSpacingError("zero anchor spacing in extrapolation scaling")
    return SNScaling(value=float(np.sqrt(k) / denom), m=float(m), p=int(p), k=float(k),
                     denominator=float(denom))


def _subsample_extrap(yb, Xb, spec, anchor_b, target_b, m, marginal, xi_estimator):
    """Extrapolation vector and anchor spacing computed inside one subsample."""
    b = yb.size
    if anchor_b * b < 1.0 or m * anchor_b >= 1.0:
        raise DomainError("anchor index infeasible inside the subsample")
    second_b = 2.0 * anchor_b if spec.variant == "dekkers_de_haan" else anchor_b / 2.0
    if second_b * b < 1.0 or second_b >= 1.0:
        raise DomainError("second anchor index infeasible inside the subsample")
    if marginal:
        xi_b = _marginal_xi(yb, anchor_b, xi_estimator)
        sub_spec = ExtrapolationSpec(target_b, anchor_b, xi_b, spec.variant)
        q_anchor = sample_quantile(yb, anchor_b)
        q_second = sample_quantile(yb, sub_spec.second_tau)
        q_hi = sample_quantile(yb, m * anchor_b)
        spacing = q_hi - q_anchor
        if spacing == 0.0:
            raise DegenerateSpacingError("zero subsample anchor spacing")
        vec = np.array([extrapolate_marginal(q_anchor, q_second, sub_spec)])
        return vec, spacing
    if not design_rank_ok(Xb):
        raise DomainError("rank-deficient subsample design")
    sub_data = Dataset(yb, Xb)
    anchor_fit = fit_qr(sub_data, anchor_b)
    if xi_estimator == "hill":
        xi_b = hill_regression(sub_data, anchor_fit)
    else:
        raise DomainError("subsample tail re-estimation supports the moment form only")
    sub_spec = ExtrapolationSpec(target_b, anchor_b, xi_b, spec.variant)
    second_fit = fit_qr(sub_data, sub_spec.second_tau)
    beta_hi = fit_qr_arrays(yb, Xb, m * anchor_b)
    spacing = float(Xb.mean(axis=0) @ (beta_hi - anchor_fit.beta))
    if spacing == 0.0:
        raise DegenerateSpacingError("zero subsample anchor spacing")
    return extrapolate_qr(anchor_fit, second_fit, sub_spec), spacing


def _marginal_xi(yb, anchor_b, xi_estimator):
    if xi_estimator == "hill":
        return hill_marginal(yb, anchor_b)
    if xi_estimator == "pickands":
        return pickands_marginal(yb, anchor_b)
    raise DomainError(f"unknown tail estimator {xi_estimator!r}")
