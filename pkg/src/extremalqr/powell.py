"""Kernel sandwich covariance for quantile-regression coefficients.

The conditional-density matrix is estimated with a Gaussian kernel on the
fit residuals, with a Hall-Sheather-type index bandwidth mapped onto the
residual scale through the empirical residual quantile spread. Used as the
normal-approximation comparator in report pipelines.
"""

from __future__ import annotations

import numpy as np
from scipy.stats import norm

from .errors import DomainError


def hall_sheather_bandwidth(tau: float, T: int, level: float = 0.95) -> float:
    """Index-scale bandwidth; halved until ``tau +- h`` stays inside (0, 1)."""
    if not 0.0 < tau < 1.0:
        raise DomainError("tau must lie in (0, 1)")
    z_a = norm.ppf(0.5 + level / 2.0)
    z_t = norm.ppf(tau)
    h = T ** (-1 / 3) * z_a ** (2 / 3) * (
        1.5 * norm.pdf(z_t) ** 2 / (2.0 * z_t**2 + 1.0)
    ) ** (1 / 3)
    while tau - h <= 0.0 or tau + h >= 1.0:
        h /= 2.0
    return float(h)


def powell_covariance(
    y: np.ndarray,
    X: np.ndarray,
    beta: np.ndarray,
    tau: float,
    bandwidth: float | None = None,
) -> np.ndarray:
    """Covariance matrix of the coefficient estimate at quantile ``tau``.

    ``bandwidth`` overrides the residual-scale kernel bandwidth; by default
    it is half the spread of the empirical residual quantiles across the
    Hall-Sheather index window.
    """
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    T = y.size
    r = y - X @ beta
    if bandwidth is None:
        h_idx = hall_sheather_bandwidth(tau, T)
        lo, hi = np.quantile(r, [tau - h_idx, tau + h_idx])
        bandwidth = (hi - lo) / 2.0
        if bandwidth <= 0.0:
            bandwidth = 1.06 * float(np.std(r)) * T ** (-1 / 5)
    if bandwidth <= 0.0:
        raise DomainError("kernel bandwidth must be positive")
    w = norm.pdf(r / bandwidth) / bandwidth
    H = (X * w[:, None]).T @ X / T
    sigma = X.T @ X / T
    try:
        H_inv = np.linalg.inv(H)
    except np.linalg.LinAlgError as exc:
        raise DomainError("singular density matrix in the kernel sandwich") from exc
    return tau * (1.0 - tau) * H_inv @ sigma @ H_inv / T
