"""Extremal quantile regression toolkit.

Quantile-regression fitting by exact check-loss minimization, tail-index
and tail-scale estimation, extreme-value resampling inference (parametric
tail bootstrap, extremal subsampling, analytical limit simulation),
median-bias correction, extrapolation to very extreme quantiles, and a
Monte Carlo lab that verifies the approximation theory at desk scale.
"""

__version__ = "0.1.0"

from .errors import (
    ApplicabilityError,
    ConfigError,
    DataError,
    DegenerateSpacingError,
    DomainError,
    ExtremalQRError,
    SolverError,
    UnboundedProgramError,
)
from .extrapolate import (
    ExtrapolationSpec,
    extrapolate_marginal,
    extrapolate_qr,
    extrapolation_ci_subsampling,
    extrapolation_limit_simulate,
)
from .inference import (
    EVLimitConfig,
    InferenceResult,
    SNScaling,
    StatisticSample,
    SubsampleConfig,
    bias_correct_and_ci,
    default_subsample_size,
    ev_limit_simulate,
    extremal_bootstrap_marginal,
    extremal_bootstrap_qr,
    extremal_subsampling_marginal,
    extremal_subsampling_qr,
    normal_approx_ci_marginal,
    regime_recommendation,
    sn_scaling_marginal,
    sn_scaling_regression,
)
from .qr import (
    Dataset,
    QuantileFit,
    check_loss,
    fit_qr,
    fit_qr_process,
    sample_quantile,
)
from .simulate import (
    SimDesign,
    approximation_quality_study,
    coverage_study,
    generate,
    recentering_divergence_study,
)
from .tail import (
    TailIndexCI,
    TailModel,
    estimate_A_T,
    estimate_L,
    estimate_gamma,
    estimate_tail_model,
    estimate_tail_model_marginal,
    hill_marginal,
    hill_regression,
    pickands_marginal,
    pickands_regression,
    select_tau_tilde,
    xi_confidence_interval,
)

__all__ = [name for name in dir() if not name.startswith("_")]
