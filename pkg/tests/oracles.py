"""Independent reference implementations used to pin expected values.

These deliberately avoid the library's solution paths: quantile fits are
checked against exhaustive vertex enumeration, sample quantiles against
direct loss evaluation, and distributional claims against closed-form
quantile functions of the simulation laws.
"""

from itertools import combinations

import numpy as np


def check_loss_direct(u, tau):
    u = np.asarray(u, dtype=float)
    return np.where(u < 0, (tau - 1.0) * u, tau * u)


def best_order_statistic(y, tau):
    """Order statistic minimizing the empirical check loss (leftmost winner)."""
    y = np.sort(np.asarray(y, dtype=float))
    losses = [check_loss_direct(y - c, tau).sum() for c in y]
    return y[int(np.argmin(losses))], float(np.min(losses))


def vertex_enumeration_qr(y, X, tau):
    """Exhaustive minimum of the check loss over all basic (vertex) solutions.

    Every vertex of the LP interpolates d observations exactly; enumerate
    all full-rank d-subsets, solve, and keep the best objective.
    """
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    T, d = X.shape
    best_obj = np.inf
    best_beta = None
    for subset in combinations(range(T), d):
        sub = np.asarray(subset)
        A = X[sub]
        if abs(np.linalg.det(A)) < 1e-12:
            continue
        beta = np.linalg.solve(A, y[sub])
        obj = check_loss_direct(y - X @ beta, tau).sum()
        if obj < best_obj - 0.0:
            best_obj = obj
            best_beta = beta
    return best_beta, float(best_obj)


def pareto_order_stat_values(T, xi):
    """Noiseless power-law 'sample': rank s holds the exact quantile at s/T."""
    s = np.arange(1, T + 1) / T
    return -(s ** -xi) if xi > 0 else s ** -xi


def cauchy_quantile(tau):
    return np.tan(np.pi * (np.asarray(tau, dtype=float) - 0.5))


def exact_pareto_quantile(tau, xi):
    tau = np.asarray(tau, dtype=float)
    return -(tau ** -xi) if xi > 0 else tau ** -xi


def gev_quantile_direct(tau, xi):
    a = -np.log1p(-np.asarray(tau, dtype=float))
    if xi == 0.0:
        return np.log(a)
    return (a ** -xi - 1.0) / (-xi)
