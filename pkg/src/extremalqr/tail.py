"""Tail-index and tail-scale estimation.

Estimators for the extreme-value index ``xi`` (spacing-ratio and moment
forms, marginal and regression variants), the regression scale vector
``gamma``, and the constant ``L`` of the parametric tail restriction
``1/Q_U(tau) = L * tau^xi``, from which the canonical scaling
``A_T = L * T^(-xi)`` follows.

Sign conventions target the lower tail; upper-tail analysis negates the
response and relabels (``side="upper"``).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .errors import ApplicabilityError, DegenerateSpacingError, DomainError
from .qr import Dataset, QuantileFit, fit_qr, sample_quantile

_LN2 = np.log(2.0)

# Limit of the spacing-ratio estimator's asymptotic variance as xi -> 0.
_PICKANDS_VAR_AT_ZERO = 3.0 / (4.0 * _LN2**4)

# Below this magnitude, xi-dependent variance factors use their xi -> 0 limits.
_XI_TINY = 1e-8


@dataclass(frozen=True)
class TailModel:
    """Estimated tail: EV index, scale vector, and canonical constants."""

    xi: float
    gamma: np.ndarray = field(repr=False)
    L: float
    A_T: float
    tau_tilde: float
    estimator: str
    side: str = "lower"

    def scale_constant(self, n: int) -> float:
        """Canonical scaling ``L * n^(-xi)`` for a sample of size ``n``."""
        return self.L * float(n) ** (-self.xi)


@dataclass(frozen=True)
class TailIndexCI:
    """Symmetric normal confidence interval for the EV index."""

    xi_hat: float
    lower: float
    upper: float
    level: float
    std_error: float


def pickands_from_quantiles(q_low: float, q_mid: float, q_high: float) -> float:
    """Spacing-ratio EV index from quantile estimates at (tau, 2tau, 4tau).

    Returns ``-(1/ln 2) * ln[(q_high - q_mid) / (q_mid - q_low)]``.
    """
    denom = q_mid - q_low
    num = q_high - q_mid
    if denom <= 0 or num <= 0:
        raise DegenerateSpacingError(
            f"degenerate quantile spacings: ({num!r}, {denom!r}); "
            "increase the threshold index or the sample size"
        )
    return float(-np.log(num / denom) / _LN2)


def pickands_marginal(y: np.ndarray, tau_tilde: float, side: str = "lower") -> float:
    """Spacing-ratio estimator of the EV index from a univariate sample.

    Location and scale invariant; valid for any sign of the index. Requires
    ``4 * tau_tilde < 1`` so the three quantile levels exist.
    """
    y = _oriented(y, side)
    _check_threshold(tau_tilde, y.size, factor=4)
    q1 = sample_quantile(y, tau_tilde)
    q2 = sample_quantile(y, 2 * tau_tilde)
    q4 = sample_quantile(y, 4 * tau_tilde)
    return pickands_from_quantiles(q1, q2, q4)


def hill_marginal(
    y: np.ndarray, tau_tilde: float, side: str = "lower", literal: bool = False
) -> float:
    """Moment (log-ratio) estimator of the EV index for heavy lower tails.

    Averages ``ln(Y_t / threshold)`` over observations beyond the sample
    ``tau_tilde``-quantile. Applicable only when that threshold is negative,
    i.e. a heavy (xi > 0) lower tail; raises otherwise.

    ``literal=True`` reproduces an alternative printed form that divides the
    sum (rather than the count) by ``tau_tilde`` and flips the sign. It is
    provided for comparison only: it is negative on heavy-tailed data and
    does not satisfy the usual root-k normal limit with variance ``xi^2``.
    """
    y = _oriented(y, side)
    _check_threshold(tau_tilde, y.size, factor=1)
    threshold = sample_quantile(y, tau_tilde)
    if threshold >= 0:
        raise ApplicabilityError(
            "moment estimator needs a negative threshold quantile; "
            "the tail on this side is not heavy/negative"
        )
    tail = y[y < threshold]
    if tail.size == 0:
        raise ApplicabilityError("no observations beyond the threshold quantile")
    moment = float(np.mean(np.log(tail / threshold)))
    if literal:
        return -moment / tau_tilde
    return moment


def pickands_regression(fits: list[QuantileFit], xbar: np.ndarray) -> float:
    """Regression analog of the spacing-ratio estimator.

    ``fits`` must hold coefficient fits at (tau, 2tau, 4tau) on one dataset;
    spacings are taken through the design mean ``xbar``.
    """
    if len(fits) != 3 or not fits[0].tau < fits[1].tau < fits[2].tau:
        raise DomainError("need fits at three increasing quantile indexes")
    xbar = np.asarray(xbar, dtype=float)
    q1, q2, q4 = (float(xbar @ f.beta) for f in fits)
    return pickands_from_quantiles(q1, q2, q4)


def hill_regression(data: Dataset, fit: QuantileFit, literal: bool = False) -> float:
    """Regression analog of the moment estimator.

    Uses fitted values ``X_t' beta(tau_tilde)`` as observation-specific
    thresholds; averages log-ratios over ``Y_t`` below their threshold.
    """
    thresholds = data.X @ fit.beta
    exceed = data.y < thresholds
    if not np.any(exceed):
        raise ApplicabilityError("no observations below their fitted threshold")
    if np.any(thresholds[exceed] >= 0):
        raise ApplicabilityError(
            "fitted threshold is nonnegative for some contributing rows; "
            "the moment estimator does not apply"
        )
    moment = float(np.mean(np.log(data.y[exceed] / thresholds[exceed])))
    if literal:
        return -moment / fit.tau
    return moment


def estimate_gamma(fit_lo: QuantileFit, fit_hi: QuantileFit, xbar: np.ndarray) -> np.ndarray:
    """Tail scale vector from a coefficient spacing, normalized so ``xbar'gamma = 1``."""
    xbar = np.asarray(xbar, dtype=float)
    diff = fit_hi.beta - fit_lo.beta
    denom = float(xbar @ diff)
    if denom == 0.0:
        raise DegenerateSpacingError("zero coefficient spacing; cannot normalize scale vector")
    return diff / denom


def estimate_L(spacing: float, xi_hat: float, tau_tilde: float) -> float:
    """Constant of the tail restriction from a quantile spacing.

    ``L = spacing / [(2^(-xi) - 1) * tau_tilde^(-xi)]`` where ``spacing`` is
    the (possibly design-projected) quantile increment between ``2*tau_tilde``
    and ``tau_tilde``. Evaluated through ``expm1`` so it stays accurate as
    ``xi -> 0``; at ``xi == 0`` exactly the constant is not identified.
    """
    if not np.isfinite(spacing) or spacing == 0.0:
        raise DegenerateSpacingError("zero or non-finite quantile spacing")
    if xi_hat == 0.0:
        raise DomainError("tail constant is not identified at xi = 0")
    denom = np.expm1(-xi_hat * _LN2) * tau_tilde ** (-xi_hat)
    return float(spacing / denom)


def estimate_A_T(L_hat: float, xi_hat: float, T: int) -> float:
    """Canonical scaling ``L * T^(-xi)`` for sample size ``T``."""
    if T < 1:
        raise DomainError("sample size must be positive")
    if not (np.isfinite(L_hat) and np.isfinite(xi_hat)):
        raise DomainError("non-finite tail constants")
    return float(L_hat * float(T) ** (-xi_hat))


def pickands_variance(xi: float) -> float:
    """Asymptotic variance of the spacing-ratio estimator, continuous at 0.

    ``xi^2 (2^(2 xi + 1) + 1) / [2 (2^xi - 1) ln 2]^2``, with the xi -> 0
    limit ``3 / (4 ln(2)^4)`` used for tiny ``xi``.
    """
    if abs(xi) < _XI_TINY:
        return _PICKANDS_VAR_AT_ZERO
    num = xi**2 * (2.0 ** (2 * xi + 1) + 1.0)
    den = (2.0 * np.expm1(xi * _LN2) * _LN2) ** 2
    return float(num / den)


def hill_variance(xi: float) -> float:
    """Asymptotic variance of the moment estimator: ``xi^2``."""
    return float(xi) ** 2


def xi_confidence_interval(
    xi_hat: float,
    estimator: str,
    tau_tilde: float,
    T: int,
    level: float = 0.90,
) -> TailIndexCI:
    """Plug-in normal confidence interval for the EV index.

    The standard error is ``sigma(xi_hat) / sqrt(tau_tilde * T)`` with the
    estimator-specific asymptotic variance. A threshold count below 30
    triggers a warning.
    """
    if not 0.0 < level < 1.0:
        raise DomainError("confidence level must lie in (0, 1)")
    k = tau_tilde * T
    if k < 30:
        warnings.warn(
            f"threshold count tau_tilde*T = {k:.1f} < 30; the normal "
            "approximation for the index estimator may be poor",
            stacklevel=2,
        )
    if estimator == "pickands":
        var = pickands_variance(xi_hat)
    elif estimator == "hill":
        var = hill_variance(xi_hat)
    else:
        raise DomainError(f"unknown estimator {estimator!r}")
    se = float(np.sqrt(var / k))
    z = float(norm.ppf(0.5 + level / 2.0))
    return TailIndexCI(
        xi_hat=float(xi_hat),
        lower=float(xi_hat - z * se),
        upper=float(xi_hat + z * se),
        level=float(level),
        std_error=se,
    )


def select_tau_tilde(tau_target: float, T: int, d_x: int = 1) -> float:
    """Threshold index closest to the target subject to a minimum tail count.

    Returns the closest ``tau_tilde`` to ``tau_target`` with
    ``tau_tilde * T / d_x >= 30``. If no index in (0, 1) satisfies the rule,
    warns and returns ``min(1/2, 30 * d_x / T)``.
    """
    if not 0.0 < tau_target < 1.0:
        raise DomainError("tau_target must lie in (0, 1)")
    floor = 30.0 * d_x / T
    if T < 30 * d_x:
        warnings.warn(
            f"sample too small for a reliable threshold (T={T} < 30*d_x={30 * d_x})",
            stacklevel=2,
        )
        return min(0.5, floor)
    return max(tau_target, floor)


def estimate_tail_model(
    data: Dataset,
    tau_tilde: float | None = None,
    estimator: str = "hill",
    side: str = "lower",
    tau_target: float | None = None,
) -> TailModel:
    """Fit the full tail model (xi, gamma, L, A_T) on a dataset.

    The threshold defaults to :func:`select_tau_tilde` at ``tau_target``
    (or at the threshold floor when no target is given). Upper-tail analysis
    negates the response internally; the returned constants then describe
    the upper tail of the original response.
    """
    if side not in ("lower", "upper"):
        raise DomainError(f"side must be 'lower' or 'upper', got {side!r}")
    if side == "upper":
        data = Dataset(-data.y, data.X, data.time_index, data.column_names)
    if tau_tilde is None:
        target = tau_target if tau_target is not None else 30.0 * data.d_x / data.T
        tau_tilde = select_tau_tilde(target, data.T, data.d_x)
    _check_threshold(tau_tilde, data.T, factor=4 if estimator == "pickands" else 2)
    xbar = data.xbar
    fit1 = fit_qr(data, tau_tilde)
    fit2 = fit_qr(data, 2 * tau_tilde)
    if estimator == "pickands":
        fit4 = fit_qr(data, 4 * tau_tilde)
        xi = pickands_regression([fit1, fit2, fit4], xbar)
    elif estimator == "hill":
        xi = hill_regression(data, fit1)
    else:
        raise DomainError(f"unknown estimator {estimator!r}")
    gamma = estimate_gamma(fit1, fit2, xbar)
    spacing = float(xbar @ (fit2.beta - fit1.beta))
    L = estimate_L(spacing, xi, tau_tilde)
    A_T = estimate_A_T(L, xi, data.T)
    return TailModel(
        xi=xi, gamma=gamma, L=L, A_T=A_T,
        tau_tilde=float(tau_tilde), estimator=estimator, side=side,
    )


def estimate_tail_model_marginal(
    y: np.ndarray,
    tau_tilde: float,
    estimator: str = "hill",
    side: str = "lower",
) -> TailModel:
    """Marginal counterpart of :func:`estimate_tail_model` on raw samples."""
    y = _oriented(y, side)
    _check_threshold(tau_tilde, len(y), factor=4 if estimator == "pickands" else 2)
    if estimator == "pickands":
        xi = pickands_marginal(y, tau_tilde)
    elif estimator == "hill":
        xi = hill_marginal(y, tau_tilde)
    else:
        raise DomainError(f"unknown estimator {estimator!r}")
    spacing = sample_quantile(y, 2 * tau_tilde) - sample_quantile(y, tau_tilde)
    L = estimate_L(spacing, xi, tau_tilde)
    A_T = estimate_A_T(L, xi, len(y))
    return TailModel(
        xi=xi, gamma=np.array([1.0]), L=L, A_T=A_T,
        tau_tilde=float(tau_tilde), estimator=estimator, side=side,
    )


def _oriented(y: np.ndarray, side: str) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if side == "lower":
        return y
    if side == "upper":
        return -y
    raise DomainError(f"side must be 'lower' or 'upper', got {side!r}")


def _check_threshold(tau_tilde: float, T: int, factor: int) -> None:
    if not 0.0 < tau_tilde < 1.0:
        raise DomainError("tau_tilde must lie in (0, 1)")
    if factor * tau_tilde >= 1.0:
        raise DomainError(
            f"threshold too central: need {factor}*tau_tilde < 1, got {factor * tau_tilde:.3f}"
        )
    if factor * tau_tilde * T < 1.0:
        raise DomainError(
            f"threshold too extreme for T={T}: {factor}*tau_tilde*T < 1"
        )
