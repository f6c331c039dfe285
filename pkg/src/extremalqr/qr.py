"""Check-loss minimization: sample quantiles and linear quantile regression.

This is the optimization kernel for the whole package. Quantile regression
is solved exactly on its linear-programming formulation (vertex solutions
from a simplex method for moderate sample sizes, interior point with
crossover above that), because downstream tail inference evaluates fits at
very low quantile indexes where vertex exactness matters.

The module also exposes ``piecewise_hinge_argmin``, the solver for convex
programs of the form ``min_z drift'z + sum_t max(0, slopes_t'z - kinks_t)``
that the extreme-value limit simulator reuses.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .errors import DomainError, SolverError, UnboundedProgramError

# Guard against float noise in tau*T when the product is mathematically integral.
_ORDER_EPS = 1e-9

# Sample size at which fit_qr switches from dual simplex to interior point.
SIMPLEX_MAX_T = 5000

# Duality-gap tolerance for the interior-point branch.
IPM_TOLERANCE = 1e-8


@dataclass(frozen=True)
class Dataset:
    """Response vector and design matrix with optional metadata.

    The design matrix must contain an all-ones first column and have full
    column rank; both are checked at construction.
    """

    y: np.ndarray
    X: np.ndarray
    time_index: list | None = None
    column_names: list[str] | None = None

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        X = np.asarray(self.X, dtype=float)
        if X.ndim != 2:
            raise DomainError("X must be a 2-d array")
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise DomainError("y must be 1-d with one entry per row of X")
        if y.shape[0] < 1:
            raise DomainError("need at least one observation")
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(X))):
            raise DomainError("non-finite entries in y or X")
        if not np.all(X[:, 0] == 1.0):
            raise DomainError("first column of X must be identically 1")
        if np.linalg.matrix_rank(X) < X.shape[1]:
            raise DomainError("design matrix is rank deficient")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)
        if self.column_names is not None and len(self.column_names) != X.shape[1]:
            raise DomainError("column_names length must match design width")
        if self.time_index is not None and len(self.time_index) != y.shape[0]:
            raise DomainError("time_index length must match sample size")

    @property
    def T(self) -> int:
        return self.y.shape[0]

    @property
    def d_x(self) -> int:
        return self.X.shape[1]

    @property
    def xbar(self) -> np.ndarray:
        """Column means of the design matrix."""
        return self.X.mean(axis=0)


@dataclass(frozen=True)
class QuantileFit:
    """Solution of a single check-loss minimization."""

    tau: float
    beta: np.ndarray = field(repr=False)
    objective: float
    n_zero_residuals: int
    negative_share: float


def check_loss(u: float, tau: float) -> float:
    """Asymmetric absolute deviation ``(tau - 1{u<0}) * u``.

    Nonnegative, zero exactly at ``u = 0``; accepts scalars or arrays.
    """
    _validate_tau(tau)
    u = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u)):
        raise DomainError("check_loss requires finite input")
    out = (tau - (u < 0)) * u
    return float(out) if out.ndim == 0 else out


def quantile_order(tau: float, T: int) -> int:
    """1-based order statistic index ``max(1, floor(tau*T))``.

    The floor is epsilon-guarded so an index that is integral in exact
    arithmetic is not knocked down by float rounding.
    """
    _validate_tau(tau)
    if T < 1:
        raise DomainError("empty sample")
    return max(1, int(np.floor(tau * T + _ORDER_EPS)))


def sample_quantile(y: np.ndarray, tau: float) -> float:
    """Sample quantile as the order statistic of rank ``max(1, floor(tau*T))``.

    No interpolation is applied. When ``tau*T < 1`` the first order statistic
    is returned with a warning, since estimates in that regime are unreliable
    and are better obtained from the extrapolation module.
    """
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        raise DomainError("empty sample")
    if not np.all(np.isfinite(y)):
        raise DomainError("non-finite values in sample")
    _validate_tau(tau)
    if tau * y.size < 1.0 - _ORDER_EPS:
        warnings.warn(
            "tau*T < 1: clamping to the first order statistic; consider the "
            "extrapolation estimators for quantiles this extreme",
            stacklevel=2,
        )
    s = quantile_order(tau, y.size)
    return float(np.partition(y, s - 1)[s - 1])


def fit_qr(data: Dataset, tau: float) -> QuantileFit:
    """Quantile-regression coefficients by exact check-loss minimization.

    Parameters
    ----------
    data : Dataset
        Validated response and design.
    tau : float
        Quantile index in (0, 1). ``tau*T < 1`` triggers a warning.

    Returns
    -------
    QuantileFit
        Coefficients, attained objective, and residual-sign diagnostics.
    """
    _validate_tau(tau)
    if tau * data.T < 1.0 - _ORDER_EPS:
        warnings.warn(
            "tau*T < 1: the regression quantile is determined by fewer "
            "observations than parameters; consider extrapolation",
            stacklevel=2,
        )
    beta = _solve_qr_lp(data.y, data.X, tau)
    return _fit_from_beta(data.y, data.X, tau, beta)


def fit_qr_process(data: Dataset, taus) -> list[QuantileFit]:
    """Fit a strictly increasing grid of quantile indexes.

    Equivalent to calling :func:`fit_qr` per index; failures are re-raised
    annotated with the offending index.
    """
    taus = [float(t) for t in taus]
    if any(b <= a for a, b in zip(taus, taus[1:])):
        raise DomainError("quantile grid must be strictly increasing")
    fits = []
    for tau in taus:
        try:
            fits.append(fit_qr(data, tau))
        except (DomainError, SolverError) as exc:
            raise type(exc)(f"tau={tau}: {exc}") from exc
    return fits


def design_rank_ok(X: np.ndarray) -> bool:
    """Cheap full-column-rank check used before subsample fits."""
    X = np.asarray(X, dtype=float)
    if X.shape[0] < X.shape[1]:
        return False
    return np.linalg.matrix_rank(X) == X.shape[1]


def fit_qr_arrays(y: np.ndarray, X: np.ndarray, tau: float) -> np.ndarray:
    """Coefficient vector only, for internal resampling loops.

    Skips Dataset validation; the caller is responsible for rank checks.
    """
    return _solve_qr_lp(np.asarray(y, dtype=float), np.asarray(X, dtype=float), tau)


def piecewise_hinge_argmin(drift: np.ndarray, slopes: np.ndarray, kinks: np.ndarray) -> np.ndarray:
    """Minimize ``drift'z + sum_t max(0, slopes[t]'z - kinks[t])`` over z.

    The one-dimensional case is solved exactly by walking the kink points
    and returning the leftmost minimizer; higher dimensions go through the
    LP formulation. Raises :class:`UnboundedProgramError` when the program
    has no finite minimum (the caller should increase the number of hinge
    terms).
    """
    drift = np.atleast_1d(np.asarray(drift, dtype=float))
    slopes = np.asarray(slopes, dtype=float)
    kinks = np.asarray(kinks, dtype=float)
    if slopes.ndim == 1:
        slopes = slopes[:, None]
    if slopes.shape[0] != kinks.shape[0] or slopes.shape[1] != drift.shape[0]:
        raise DomainError("inconsistent hinge program shapes")
    if drift.shape[0] == 1:
        return np.array([_hinge_argmin_1d(drift[0], slopes[:, 0], kinks)])
    return _hinge_argmin_lp(drift, slopes, kinks)


def _validate_tau(tau: float) -> None:
    if not (np.isfinite(tau) and 0.0 < tau < 1.0):
        raise DomainError(f"quantile index must lie in (0, 1), got {tau!r}")


def _solve_qr_lp(y: np.ndarray, X: np.ndarray, tau: float) -> np.ndarray:
    # minimize tau*1'u + (1-tau)'v  s.t.  X beta + u - v = y,  u, v >= 0
    T, d = X.shape
    if d == 1 and np.all(X[:, 0] == 1.0):
        # Intercept-only check loss is minimized by an order statistic; solve
        # it directly with a deterministic leftmost-vertex tie break (the LP
        # optimal face is flat at integral tau*T and solver pivoting would
        # pick a data-dependent endpoint).
        s = min(T, max(1, int(np.ceil(tau * T - _ORDER_EPS))))
        return np.array([np.partition(y, s - 1)[s - 1]])
    c = np.concatenate([np.zeros(d), np.full(T, tau), np.full(T, 1.0 - tau)])
    A_eq = sparse.hstack(
        [sparse.csc_matrix(X), sparse.eye(T, format="csc"), -sparse.eye(T, format="csc")],
        format="csc",
    )
    bounds = [(None, None)] * d + [(0, None)] * (2 * T)
    if T <= SIMPLEX_MAX_T:
        method, options = "highs-ds", {}
    else:
        method, options = "highs-ipm", {"ipm_optimality_tolerance": IPM_TOLERANCE}
    res = linprog(c, A_eq=A_eq, b_eq=y, bounds=bounds, method=method, options=options)
    if res.status != 0 or res.x is None:
        raise SolverError(
            f"quantile regression LP failed (status={res.status}, nit={res.nit}): {res.message}"
        )
    return res.x[:d]


def _fit_from_beta(y: np.ndarray, X: np.ndarray, tau: float, beta: np.ndarray) -> QuantileFit:
    r = y - X @ beta
    atol = 1e-9 * max(1.0, float(np.max(np.abs(y))))
    n_zero = int(np.sum(np.abs(r) <= atol))
    negative_share = float(np.sum(r < -atol)) / y.size
    objective = float(np.sum(check_loss(r, tau)))
    return QuantileFit(
        tau=float(tau),
        beta=beta,
        objective=objective,
        n_zero_residuals=n_zero,
        negative_share=negative_share,
    )


def _hinge_argmin_1d(drift: float, slopes: np.ndarray, kinks: np.ndarray) -> float:
    active = slopes != 0.0
    s = slopes[active]
    r = kinks[active] / s
    slope_left = drift + s[s < 0].sum()
    slope_right = drift + s[s > 0].sum()
    if slope_left > 0 or slope_right < 0 or r.size == 0:
        raise UnboundedProgramError(
            "piecewise-linear program unbounded; increase the truncation length"
        )
    order = np.argsort(r, kind="stable")
    cum = slope_left + np.cumsum(np.abs(s[order]))
    # Leftmost minimizer: first kink after which the slope is nonnegative.
    j = int(np.argmax(cum >= 0.0))
    if cum[j] < 0.0:
        raise UnboundedProgramError(
            "piecewise-linear program unbounded; increase the truncation length"
        )
    return float(r[order[j]])


def _hinge_argmin_lp(drift: np.ndarray, slopes: np.ndarray, kinks: np.ndarray) -> np.ndarray:
    M, d = slopes.shape
    c = np.concatenate([drift, np.ones(M)])
    A_ub = sparse.hstack([sparse.csc_matrix(slopes), -sparse.eye(M, format="csc")], format="csc")
    bounds = [(None, None)] * d + [(0, None)] * M
    res = linprog(c, A_ub=A_ub, b_ub=kinks, bounds=bounds, method="highs-ds")
    if res.status == 3:
        raise UnboundedProgramError(
            "piecewise-linear program unbounded; increase the truncation length"
        )
    if res.status != 0 or res.x is None:
        raise SolverError(f"hinge program failed (status={res.status}): {res.message}")
    return res.x[:d]
