"""Extreme-value inference for extremal quantiles and quantile regression.

Three routes to the sampling law of a normalized quantile statistic:

* parametric tail bootstrap: simulate samples from a generalized-EV-type
  variable whose tail matches the estimated index, and recompute the
  self-normalized statistic per sample;
* extremal subsampling: subsample statistics recentered at the full-sample
  quantile of a subsample-adjusted index, which stays consistent at the
  tails where conventional (full-index) recentering fails;
* analytical limit simulation: draw directly from the limit law of the
  statistic, an arg-min of a convex piecewise-linear program driven by
  cumulative exponential arrivals.

All replication loops derive one RNG stream per replication index from the
top-level seed, so draw vectors are bitwise reproducible regardless of how
the replications are scheduled. Degenerate replications are skipped and
counted, never resampled.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.stats import norm

from .errors import ConfigError, DegenerateSpacingError, DomainError, SolverError
from .qr import (
    Dataset,
    design_rank_ok,
    fit_qr_arrays,
    piecewise_hinge_argmin,
    quantile_order,
    sample_quantile,
)

logger = logging.getLogger(__name__)

_QUANTILE_EPS = 1e-9


@dataclass(frozen=True)
class SNScaling:
    """Self-normalizing scale factor ``sqrt(tau*T) / spacing``."""

    value: float
    m: float
    p: int
    k: float
    denominator: float


@dataclass(frozen=True)
class StatisticSample:
    """Empirical law of a normalized statistic: sorted draws plus provenance."""

    draws: np.ndarray = field(repr=False)
    S: int
    statistic: str
    origin: str
    seed: int
    skipped: int = 0

    def __post_init__(self):
        draws = np.sort(np.asarray(self.draws, dtype=float))
        object.__setattr__(self, "draws", draws)
        object.__setattr__(self, "S", int(draws.size))
        if self.S < 2:
            raise DomainError("a statistic sample needs at least two draws")

    def quantile(self, p: float) -> float:
        """Left-continuous empirical inverse: the ``ceil(p*S)``-th sorted draw."""
        if not 0.0 < p < 1.0:
            raise DomainError("quantile level must lie in (0, 1)")
        idx = int(np.ceil(p * self.S - _QUANTILE_EPS))
        idx = min(max(idx, 1), self.S)
        return float(self.draws[idx - 1])

    def to_json_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "origin": self.origin,
            "seed": self.seed,
            "S": self.S,
            "skipped": self.skipped,
            "draws": self.draws.tolist(),
        }


@dataclass(frozen=True)
class EVLimitConfig:
    """Inputs of the analytical limit simulator.

    ``design_source`` is a matrix of observed design rows to resample from
    (None means intercept only). ``M`` truncates the hinge sum; it defaults
    to ``ceil(10 * m * k)`` and must be at least ``10 * k``. ``jitter``
    optionally smooths resampled non-constant design columns with Gaussian
    noise of that standard deviation (off by default).
    """

    k: float
    xi: float
    gamma: np.ndarray = field(default_factory=lambda: np.array([1.0]))
    chi: int | None = None
    design_source: np.ndarray | None = None
    M: int | None = None
    S: int = 200
    seed: int = 0
    p: int = 5
    jitter: float = 0.0

    def resolved_chi(self) -> int:
        if self.chi is not None:
            return int(self.chi)
        if self.xi == 0.0:
            raise DomainError("chi is undefined at xi = 0; use the SN mode's limit branch")
        return 1 if self.xi < 0 else -1

    @property
    def d_x(self) -> int:
        return 1 if self.design_source is None else int(np.asarray(self.design_source).shape[1])


@dataclass(frozen=True)
class SubsampleConfig:
    """Subsample size, replication count, and dependence handling."""

    b: int
    S: int = 500
    dependent: bool = False

    def tau_b(self, tau: float, T: int) -> float:
        """Subsample-adjusted quantile index with the central-range guard.

        ``min(tau*T/b, 0.2)`` in the tail regime; for ``tau >= 0.2`` the
        procedure reverts to central-order inference and keeps ``tau``.
        """
        if tau >= 0.2:
            return tau
        return min(tau * T / self.b, 0.2)


def default_subsample_size(T: int) -> int:
    """Rule-of-thumb subsample size ``floor(50 + sqrt(T))``."""
    return int(math.floor(50.0 + math.sqrt(T)))


@dataclass(frozen=True)
class InferenceResult:
    """Median-bias-corrected point estimate and confidence interval."""

    point: float
    lower: float
    upper: float
    level: float
    raw: float
    method: tuple[str, str]
    scaling: SNScaling | float

    def to_json_dict(self) -> dict:
        scaling = self.scaling.value if isinstance(self.scaling, SNScaling) else self.scaling
        return {
            "point": self.point,
            "lower": self.lower,
            "upper": self.upper,
            "level": self.level,
            "raw": self.raw,
            "statistic": self.method[0],
            "origin": self.method[1],
            "scaling": scaling,
        }


def gev_quantile(tau, xi: float):
    """Quantile function ``([-ln(1-tau)]^(-xi) - 1) / (-xi)`` of the
    bootstrap generator variable; ``ln(-ln(1-tau))`` in the xi -> 0 limit."""
    tau = np.asarray(tau, dtype=float)
    a = -np.log1p(-tau)
    if xi == 0.0:
        out = np.log(a)
    else:
        out = np.expm1(-xi * np.log(a)) / (-xi)
    return float(out) if out.ndim == 0 else out


def gev_from_exponential(e, xi: float):
    """Map standard exponentials to the bootstrap generator variable."""
    e = np.asarray(e, dtype=float)
    if xi == 0.0:
        return np.log(e)
    return np.expm1(-xi * np.log(e)) / (-xi)


def sn_scaling_marginal(y: np.ndarray, tau: float, p: int = 5) -> SNScaling:
    """Self-normalizing factor for a sample quantile.

    Uses the spacing to the quantile ``m*tau`` with ``m = p/(tau*T) + 1``,
    so the spacing spans ``p`` additional order statistics.
    """
    y = np.asarray(y, dtype=float)
    k = tau * y.size
    if k < 1.0 - _QUANTILE_EPS:
        raise DomainError("tau*T must be at least 1 for the self-normalized statistic")
    m = p / k + 1.0
    if m * tau >= 1.0:
        raise DomainError(
            f"m*tau = {m * tau:.3f} >= 1; reduce the spacing parameter p or move tau inward"
        )
    denom = sample_quantile(y, m * tau) - sample_quantile(y, tau)
    if denom == 0.0:
        raise DegenerateSpacingError("zero quantile spacing in self-normalization")
    return SNScaling(value=float(np.sqrt(k) / denom), m=float(m), p=int(p), k=float(k),
                     denominator=float(denom))


def sn_scaling_regression(data: Dataset, tau: float, p: int = 5,
                          fits: tuple | None = None) -> SNScaling:
    """Self-normalizing factor for a regression quantile.

    ``m = (d_x + p)/(tau*T) + 1`` and the spacing is the design-mean
    projection of the coefficient increment. Precomputed fits at
    ``(tau, m*tau)`` can be passed to avoid refitting.
    """
    k = tau * data.T
    if k < 1.0 - _QUANTILE_EPS:
        raise DomainError("tau*T must be at least 1 for the self-normalized statistic")
    m = (data.d_x + p) / k + 1.0
    if m * tau >= 1.0:
        raise DomainError(
            f"m*tau = {m * tau:.3f} >= 1; reduce the spacing parameter p or move tau inward"
        )
    if fits is None:
        beta_lo = fit_qr_arrays(data.y, data.X, tau)
        beta_hi = fit_qr_arrays(data.y, data.X, m * tau)
    else:
        beta_lo, beta_hi = (np.asarray(f, dtype=float) for f in fits)
    denom = float(data.xbar @ (beta_hi - beta_lo))
    if denom == 0.0:
        raise DegenerateSpacingError("zero coefficient spacing in self-normalization")
    return SNScaling(value=float(np.sqrt(k) / denom), m=float(m), p=int(p), k=float(k),
                     denominator=float(denom))


def extremal_bootstrap_marginal(
    xi_hat: float,
    tau: float,
    T: int,
    S: int = 500,
    seed: int = 0,
    p: int = 5,
) -> StatisticSample:
    """Parametric tail bootstrap of the self-normalized sample quantile.

    Each replication draws a size-``T`` i.i.d. sample of the generator
    variable with index ``xi_hat``, recomputes the self-normalized statistic
    in that sample, and centers it at the generator's exact quantile. The
    draws estimate the sampling law of the statistic on the original data.
    """
    if S < 2:
        raise DomainError("need at least two bootstrap replications")
    k = tau * T
    m = p / k + 1.0
    if m * tau >= 1.0:
        raise DomainError("m*tau >= 1; reduce the spacing parameter p")
    center = gev_quantile(tau, xi_hat)
    s_lo = quantile_order(tau, T)
    s_hi = quantile_order(m * tau, T)
    draws = np.empty(S)
    kept = 0
    for rng in _child_rngs(seed, S):
        ystar = gev_from_exponential(rng.standard_exponential(T), xi_hat)
        part = np.partition(ystar, (s_lo - 1, s_hi - 1))
        q_lo, q_hi = part[s_lo - 1], part[s_hi - 1]
        spacing = q_hi - q_lo
        if spacing == 0.0:
            continue
        draws[kept] = np.sqrt(k) * (q_lo - center) / spacing
        kept += 1
    skipped = S - kept
    if skipped:
        logger.info("bootstrap: skipped %d degenerate replications", skipped)
    return StatisticSample(draws=draws[:kept], S=kept, statistic="SN",
                           origin="bootstrap", seed=seed, skipped=skipped)


def extremal_subsampling_marginal(
    y: np.ndarray,
    tau: float,
    cfg: SubsampleConfig,
    statistic: str = "SN",
    A_b_hat: float | None = None,
    p: int = 5,
    seed: int = 0,
    recenter: str = "extremal",
) -> StatisticSample:
    """Subsampling law of a normalized sample quantile.

    Draws ``S`` subsamples of size ``b`` (contiguous windows when
    ``cfg.dependent``, otherwise without replacement), computes the
    subsample quantile at the adjusted index, and recenters at the
    full-sample quantile of that same index. ``statistic="CN"`` scales by
    the supplied canonical constant ``A_b_hat`` instead of the
    self-normalizing spacing.

    ``recenter="conventional"`` is a negative control: it skips the index
    adjustment and recenters at the full-sample ``tau``-quantile, the
    construction that breaks down on heavy tails.
    """
    y = np.asarray(y, dtype=float)
    T = y.size
    if cfg.b >= T:
        raise DomainError(f"subsample size b={cfg.b} must be smaller than T={T}")
    if statistic not in ("SN", "CN"):
        raise DomainError(f"statistic must be 'SN' or 'CN', got {statistic!r}")
    if statistic == "CN" and A_b_hat is None:
        raise DomainError("CN subsampling requires the canonical constant A_b_hat")
    if recenter not in ("extremal", "conventional"):
        raise DomainError(f"recenter must be 'extremal' or 'conventional', got {recenter!r}")

    idx = cfg.tau_b(tau, T) if recenter == "extremal" else tau
    k_full = tau * T
    m = p / k_full + 1.0
    if statistic == "SN" and m * idx >= 1.0:
        raise DomainError("m*tau_b >= 1 inside subsamples; reduce the spacing parameter p")
    center = sample_quantile(y, idx)
    s_lo = quantile_order(idx, cfg.b)
    s_hi = quantile_order(m * idx, cfg.b)
    root_k = np.sqrt(idx * cfg.b)

    draws = np.empty(cfg.S)
    kept = 0
    for rng in _child_rngs(seed, cfg.S):
        sub = _draw_subsample(y, cfg, rng)
        if statistic == "SN":
            part = np.partition(sub, (s_lo - 1, s_hi - 1))
            q_lo, q_hi = part[s_lo - 1], part[s_hi - 1]
            spacing = q_hi - q_lo
            if spacing == 0.0:
                continue
            draws[kept] = root_k * (q_lo - center) / spacing
        else:
            q_lo = np.partition(sub, s_lo - 1)[s_lo - 1]
            draws[kept] = A_b_hat * (q_lo - center)
        kept += 1
    skipped = cfg.S - kept
    if skipped:
        logger.info("subsampling: skipped %d degenerate replications", skipped)
    return StatisticSample(draws=draws[:kept], S=kept, statistic=statistic,
                           origin="subsampling", seed=seed, skipped=skipped)


def ev_limit_simulate(
    cfg: EVLimitConfig,
    mode: str = "CN",
    psi: np.ndarray | None = None,
) -> StatisticSample:
    """Simulate the extreme-order limit law of the normalized QR statistic.

    Each draw builds cumulative exponential arrivals, resamples design rows,
    and solves the convex piecewise-linear arg-min program truncated at
    ``M`` terms (the one-dimensional case is solved exactly by kink
    enumeration; higher dimensions via the LP kernel). In ``SN`` mode the
    program is solved at ``k`` and ``m*k`` on the same arrival stream and
    the self-normalized ratio is returned.

    ``psi`` projects vector draws to a scalar; it is required when the
    design has more than one column.
    """
    if mode not in ("CN", "SN"):
        raise DomainError(f"mode must be 'CN' or 'SN', got {mode!r}")
    if cfg.k <= 0:
        raise DomainError("k must be positive")
    d = cfg.d_x
    gamma = np.asarray(cfg.gamma, dtype=float)
    if gamma.shape != (d,):
        raise DomainError("gamma length must match the design width")
    psi_vec = _resolve_psi(psi, d)
    at_zero = cfg.xi == 0.0
    if at_zero and mode == "CN":
        raise DomainError("the canonical normalization is not identified at xi = 0")
    chi = 0 if at_zero else cfg.resolved_chi()

    m = (d + cfg.p) / cfg.k + 1.0
    M = cfg.M if cfg.M is not None else int(np.ceil(10.0 * m * cfg.k))
    if M < 10 * cfg.k:
        raise DomainError(f"truncation length M={M} must be at least 10*k")

    source = None
    if cfg.design_source is not None:
        source = np.asarray(cfg.design_source, dtype=float)
        if source.ndim != 2 or source.shape[1] != d:
            raise DomainError("design_source must be a 2-d array matching gamma")
    xbar = np.ones(1) if source is None else source.mean(axis=0)

    draws = np.empty(cfg.S)
    for s, rng in enumerate(_child_rngs(cfg.seed, cfg.S)):
        gam_arrivals = np.cumsum(rng.standard_exponential(M))
        if source is None:
            rows = np.ones((M, 1))
            scale = np.ones(M)
        else:
            rows = source[rng.integers(0, source.shape[0], M)]
            if cfg.jitter > 0.0:
                rows = rows.copy()
                rows[:, 1:] += cfg.jitter * rng.standard_normal((M, d - 1))
            scale = rows @ gamma
        z_k = _limit_argmin(cfg.k, cfg.xi, chi, xbar, rows, scale, gam_arrivals)
        if mode == "CN":
            draws[s] = float(psi_vec @ z_k)
            continue
        z_mk = _limit_argmin(m * cfg.k, cfg.xi, chi, xbar, rows, scale, gam_arrivals)
        if at_zero:
            shift = np.log(m)
        else:
            shift = np.expm1(-cfg.xi * np.log(m)) * cfg.k ** (-cfg.xi)
        denom = float(xbar @ (z_mk - z_k)) + shift
        draws[s] = np.sqrt(cfg.k) * float(psi_vec @ z_k) / denom
    return StatisticSample(draws=draws, S=cfg.S, statistic=mode, origin="analytical",
                           seed=cfg.seed, skipped=0)


def extremal_bootstrap_qr_matrix(
    data: Dataset,
    tau: float,
    xi_hat: float,
    gamma_hat: np.ndarray,
    S: int = 500,
    seed: int = 0,
    p: int = 5,
) -> tuple[np.ndarray, int]:
    """Vector draws of the bootstrapped QR statistic, one row per replication.

    Returns the ``(kept, d_x)`` draw matrix and the skipped-replication
    count; project with any ``psi`` to get scalar laws for linear
    functionals of the coefficients.
    """
    return _bootstrap_qr_draws(data, tau, xi_hat, gamma_hat, S, seed, p)


def extremal_bootstrap_qr(
    data: Dataset,
    tau: float,
    xi_hat: float,
    gamma_hat: np.ndarray,
    S: int = 500,
    seed: int = 0,
    p: int = 5,
    psi: np.ndarray | None = None,
    engine: str = "auto",
) -> StatisticSample:
    """Parametric tail bootstrap of the self-normalized QR statistic.

    Holds the design fixed, simulates responses ``Y* = g(E) * X'gamma_hat``
    with ``g`` the generator transform at index ``xi_hat``, refits the
    regression quantiles at ``tau`` and ``m*tau`` per replication, and
    self-normalizes within the replication. Draws are centered at the exact
    bootstrap coefficient vector ``gamma_hat * g-quantile(tau)``.

    With an intercept-only design this reduces by construction to
    :func:`extremal_bootstrap_marginal` with spacing parameter ``p + 1``;
    the reduction is taken as a fast path unless ``engine="lp"`` forces the
    regression solver.
    """
    psi_vec = _resolve_psi(psi, data.d_x)
    if data.d_x == 1 and engine == "auto":
        out = extremal_bootstrap_marginal(xi_hat, tau, data.T, S=S, seed=seed, p=p + 1)
        return replace(out, draws=psi_vec[0] * out.draws)
    matrix, skipped = _bootstrap_qr_draws(data, tau, xi_hat, gamma_hat, S, seed, p)
    return StatisticSample(draws=matrix @ psi_vec, S=matrix.shape[0], statistic="SN",
                           origin="bootstrap", seed=seed, skipped=skipped)


def extremal_subsampling_qr_matrix(
    data: Dataset,
    tau: float,
    cfg: SubsampleConfig,
    statistic: str = "SN",
    A_b_hat: float | None = None,
    p: int = 5,
    seed: int = 0,
) -> tuple[np.ndarray, int]:
    """Vector draws of the subsampled QR statistic, one row per subsample.

    Returns the ``(kept, d_x)`` draw matrix and the skipped count.
    """
    if statistic not in ("SN", "CN"):
        raise DomainError(f"statistic must be 'SN' or 'CN', got {statistic!r}")
    if statistic == "CN" and A_b_hat is None:
        raise DomainError("CN subsampling requires the canonical constant A_b_hat")
    if cfg.b >= data.T:
        raise DomainError(f"subsample size b={cfg.b} must be smaller than T={data.T}")

    tau_b = cfg.tau_b(tau, data.T)
    m = (data.d_x + p) / (tau * data.T) + 1.0
    if statistic == "SN" and m * tau_b >= 1.0:
        raise DomainError("m*tau_b >= 1 inside subsamples; reduce the spacing parameter p")
    beta_center = fit_qr_arrays(data.y, data.X, tau_b)
    root_k = np.sqrt(tau_b * cfg.b)

    draws = np.empty((cfg.S, data.d_x))
    kept = 0
    for rng in _child_rngs(seed, cfg.S):
        rows = _subsample_indices(data.T, cfg, rng)
        Xb, yb = data.X[rows], data.y[rows]
        if not design_rank_ok(Xb):
            continue
        try:
            beta_lo = fit_qr_arrays(yb, Xb, tau_b)
            diff = beta_lo - beta_center
            if statistic == "SN":
                beta_hi = fit_qr_arrays(yb, Xb, m * tau_b)
                spacing = float(Xb.mean(axis=0) @ (beta_hi - beta_lo))
                if spacing == 0.0:
                    continue
                draws[kept] = root_k * diff / spacing
            else:
                draws[kept] = A_b_hat * diff
        except SolverError:
            continue
        kept += 1
    skipped = cfg.S - kept
    if skipped:
        logger.info("QR subsampling: skipped %d replications", skipped)
    return draws[:kept], skipped


def extremal_subsampling_qr(
    data: Dataset,
    tau: float,
    cfg: SubsampleConfig,
    statistic: str = "SN",
    A_b_hat: float | None = None,
    p: int = 5,
    seed: int = 0,
    psi: np.ndarray | None = None,
    engine: str = "auto",
) -> StatisticSample:
    """Subsampling law of the normalized QR statistic.

    Subsample fits at the adjusted index are recentered at the full-sample
    coefficient fit of that index. Rank-deficient subsample designs and
    degenerate spacings are skipped and counted. The intercept-only case
    delegates to the marginal routine (spacing parameter ``p + 1``) unless
    ``engine="lp"``.
    """
    psi_vec = _resolve_psi(psi, data.d_x)
    if data.d_x == 1 and engine == "auto":
        out = extremal_subsampling_marginal(
            data.y, tau, cfg, statistic=statistic, A_b_hat=A_b_hat, p=p + 1, seed=seed)
        return replace(out, draws=psi_vec[0] * out.draws)
    matrix, skipped = extremal_subsampling_qr_matrix(
        data, tau, cfg, statistic=statistic, A_b_hat=A_b_hat, p=p, seed=seed)
    return StatisticSample(draws=matrix @ psi_vec, S=matrix.shape[0], statistic=statistic,
                           origin="subsampling", seed=seed, skipped=skipped)


def bias_correct_and_ci(
    raw: float,
    sample: StatisticSample,
    scaling: SNScaling | float,
    level: float = 0.90,
) -> InferenceResult:
    """Median-bias-corrected estimate and equal-tailed confidence interval.

    The corrected point is ``raw - c_{1/2}/scaling`` and the interval
    endpoints are ``raw - c_{1-a/2}/scaling`` and ``raw - c_{a/2}/scaling``
    with ``c_p`` the empirical quantiles of the draw law. Endpoints are
    ordered, which also handles negative canonical scalings.
    """
    if not 0.0 < level < 1.0:
        raise DomainError("confidence level must lie in (0, 1)")
    if sample.S < 100:
        logger.info("only %d draws; tail quantiles of the draw law may be unstable", sample.S)
    scale = scaling.value if isinstance(scaling, SNScaling) else float(scaling)
    if scale == 0.0:
        raise DomainError("scaling must be nonzero")
    alpha = 1.0 - level
    point = raw - sample.quantile(0.5) / scale
    a = raw - sample.quantile(1.0 - alpha / 2.0) / scale
    b = raw - sample.quantile(alpha / 2.0) / scale
    return InferenceResult(
        point=float(point), lower=float(min(a, b)), upper=float(max(a, b)),
        level=float(level), raw=float(raw),
        method=(sample.statistic, sample.origin), scaling=scaling,
    )


def normal_approx_ci_marginal(
    y: np.ndarray,
    tau: float,
    xi_hat: float,
    p: int = 5,
    level: float = 0.90,
) -> InferenceResult:
    """Normal-approximation interval for a sample quantile.

    Applies the intermediate-order normal law of the self-normalized
    statistic, with variance ``xi^2 / (m^xi - 1)^2`` evaluated at the
    estimated index. Symmetric, hence no median-bias correction.
    """
    if not 0.0 < level < 1.0:
        raise DomainError("confidence level must lie in (0, 1)")
    y = np.asarray(y, dtype=float)
    scaling = sn_scaling_marginal(y, tau, p=p)
    raw = sample_quantile(y, tau)
    if xi_hat == 0.0:
        sigma = 1.0 / np.log(scaling.m)
    else:
        sigma = abs(xi_hat / np.expm1(xi_hat * np.log(scaling.m)))
    z = float(norm.ppf(0.5 + level / 2.0))
    half = z * sigma / abs(scaling.value)
    return InferenceResult(
        point=float(raw), lower=float(raw - half), upper=float(raw + half),
        level=float(level), raw=float(raw), method=("SN", "normal"), scaling=scaling,
    )


def regime_recommendation(
    tau: float,
    T: int,
    d_x: int,
    design_kind: str = "continuous",
    indicator_share: float | None = None,
) -> str:
    """Recommend EV, normal, or both inference regimes.

    The dimension-adjusted order ``tau*T/d_x`` (or ``tau*T*share`` for a
    sparse indicator design) is compared against the 15/30 rule of thumb.
    """
    if design_kind == "continuous":
        adjusted = tau * T / d_x
    elif design_kind == "sparse_indicator":
        if indicator_share is None or not 0.0 < indicator_share <= 1.0:
            raise DomainError("sparse_indicator designs need an indicator share in (0, 1]")
        adjusted = tau * T * indicator_share
    else:
        raise DomainError(f"unknown design kind {design_kind!r}")
    if adjusted <= 15.0:
        return "EV"
    if adjusted <= 30.0:
        return "both"
    return "normal"


def _child_rngs(seed: int, S: int):
    for child in np.random.SeedSequence(seed).spawn(S):
        yield np.random.default_rng(child)


def _resolve_psi(psi, d: int) -> np.ndarray:
    if psi is None:
        if d != 1:
            raise ConfigError("psi is required to project vector draws when d_x > 1")
        return np.ones(1)
    psi = np.asarray(psi, dtype=float)
    if psi.shape != (d,):
        raise ConfigError(f"psi must have shape ({d},)")
    return psi


def _draw_subsample(y: np.ndarray, cfg: SubsampleConfig, rng) -> np.ndarray:
    return y[_subsample_indices(y.size, cfg, rng)]


def _subsample_indices(T: int, cfg: SubsampleConfig, rng) -> np.ndarray:
    if cfg.dependent:
        start = int(rng.integers(0, T - cfg.b + 1))
        return np.arange(start, start + cfg.b)
    return rng.choice(T, size=cfg.b, replace=False)


def _limit_argmin(j: float, xi: float, chi: int, xbar, rows, scale, gam_arrivals) -> np.ndarray:
    """Solve the truncated limit arg-min program at index ``j``.

    Returns the (chi-oriented) limit vector; at ``xi == 0`` (``chi == 0``)
    the rescaled logarithmic-kink program is solved instead and returned
    unoriented, which is the standardized object the SN ratio needs.
    """
    if chi == 0:
        kinks = np.log(gam_arrivals / j) * scale
        z = piecewise_hinge_argmin(-j * xbar, rows, kinks)
        return z
    kinks = chi * (gam_arrivals ** (-xi) - j ** (-xi)) * scale
    z = piecewise_hinge_argmin(-j * xbar, rows, kinks)
    return chi * z


def _bootstrap_qr_draws(data, tau, xi_hat, gamma_hat, S, seed, p):
    gamma_hat = np.asarray(gamma_hat, dtype=float)
    scale = data.X @ gamma_hat
    bad = scale <= 0.0
    if np.any(bad):
        floor = 1e-6 * float(np.median(scale[~bad])) if np.any(~bad) else 1e-6
        logger.warning(
            "clipping %d nonpositive tail-scale rows to %.3g; the scale vector "
            "should satisfy X'gamma > 0", int(bad.sum()), floor)
        scale = np.where(bad, floor, scale)
    k = tau * data.T
    m = (data.d_x + p) / k + 1.0
    if m * tau >= 1.0:
        raise DomainError("m*tau >= 1; reduce the spacing parameter p")
    beta_center = gamma_hat * gev_quantile(tau, xi_hat)
    root_k = np.sqrt(k)
    xbar = data.xbar

    draws = np.empty((S, data.d_x))
    kept = 0
    for rng in _child_rngs(seed, S):
        ystar = gev_from_exponential(rng.standard_exponential(data.T), xi_hat) * scale
        try:
            beta_lo = fit_qr_arrays(ystar, data.X, tau)
            beta_hi = fit_qr_arrays(ystar, data.X, m * tau)
        except SolverError:
            continue
        spacing = float(xbar @ (beta_hi - beta_lo))
        if spacing == 0.0:
            continue
        draws[kept] = root_k * (beta_lo - beta_center) / spacing
        kept += 1
    skipped = S - kept
    if skipped:
        logger.info("QR bootstrap: skipped %d replications", skipped)
    return draws[:kept], skipped
