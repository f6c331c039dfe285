"""Monte Carlo designs and studies verifying the approximation theory.

Data generators with analytically known quantiles (heavy and light tails,
marginal and location-scale regression designs), a study comparing the
extreme-value and normal approximations to the exact finite-sample law of
extremal sample quantiles, coverage studies for the inference methods, and
the negative control showing why subsampling must recenter at the
subsample-adjusted index.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.stats import norm
from scipy.stats import t as student_t

from .errors import ApplicabilityError, ConfigError, DomainError
from .inference import (
    EVLimitConfig,
    SubsampleConfig,
    bias_correct_and_ci,
    default_subsample_size,
    ev_limit_simulate,
    extremal_bootstrap_marginal,
    extremal_subsampling_marginal,
    extremal_subsampling_qr,
    gev_quantile,
    normal_approx_ci_marginal,
    sn_scaling_marginal,
    sn_scaling_regression,
)
from .qr import Dataset, quantile_order, sample_quantile
from .tail import (
    estimate_tail_model_marginal,
    hill_marginal,
    pickands_marginal,
    select_tau_tilde,
)

LAWS = ("cauchy", "student_t", "exact_pareto", "uniform", "gev_bootstrap")

COVERAGE_METHODS = ("subsampling_sn", "subsampling_cn", "bootstrap_sn",
                    "analytical_sn", "normal")


@dataclass(frozen=True)
class SimDesign:
    """A reproducible simulation design with analytically known tails.

    ``d_x == 1`` draws a plain sample from the law. ``d_x >= 2`` builds a
    location-scale design ``Y = (X'gamma) * U`` with an intercept plus
    uniform(0.5, 1.5) covariates and ``gamma`` normalized so the design-mean
    scale is one; the conditional quantiles are then exactly
    ``x'gamma * Q_U(tau)``.
    """

    law: str
    T: int
    d_x: int = 1
    xi: float | None = None
    nu: float | None = None
    gamma: tuple | None = None
    seed: int = 0

    def __post_init__(self):
        if self.law not in LAWS:
            raise DomainError(f"unknown law {self.law!r}; choose from {LAWS}")
        if self.law == "student_t" and (self.nu is None or self.nu <= 0):
            raise DomainError("student_t needs degrees of freedom nu > 0")
        if self.law in ("exact_pareto", "gev_bootstrap"):
            if self.xi is None or self.xi == 0.0:
                raise DomainError(f"{self.law} needs a nonzero tail index xi")
        if self.T < 1:
            raise DomainError("T must be positive")
        if self.d_x < 1:
            raise DomainError("d_x must be at least 1")
        if self.d_x > 1:
            g = self.gamma if self.gamma is not None else tuple(np.ones(self.d_x))
            g = tuple(float(v) for v in g)
            if len(g) != self.d_x:
                raise DomainError("gamma length must equal d_x")
            if any(v < 0 for v in g) or sum(g) <= 0:
                raise DomainError("gamma entries must be nonnegative with positive sum")
            object.__setattr__(self, "gamma", g)

    @property
    def true_xi(self) -> float:
        return {
            "cauchy": 1.0,
            "student_t": 1.0 / self.nu if self.nu else np.nan,
            "exact_pareto": self.xi,
            "uniform": -1.0,
            "gev_bootstrap": self.xi,
        }[self.law]

    @property
    def hill_applicable(self) -> bool:
        """Whether the moment estimator applies to the lower tail (heavy
        and negative); generators with bounded or positive lower support
        flag this so callers pick the spacing-ratio estimator instead."""
        if self.true_xi <= 0:
            return False
        return True

    def normalized_gamma(self) -> np.ndarray:
        if self.d_x == 1:
            return np.array([1.0])
        g = np.asarray(self.gamma, dtype=float)
        return g / g.sum()

    def true_u_quantile(self, tau):
        """Quantile of the noise law shifted to end at 0 or -inf."""
        tau = np.asarray(tau, dtype=float)
        if self.law == "cauchy":
            out = np.tan(np.pi * (tau - 0.5))
        elif self.law == "student_t":
            out = student_t.ppf(tau, self.nu)
        elif self.law == "exact_pareto":
            out = -(tau ** -self.xi) if self.xi > 0 else tau ** -self.xi
        elif self.law == "uniform":
            out = tau
        else:  # gev_bootstrap
            if self.xi > 0:
                out = np.asarray(gev_quantile(tau, self.xi))
            else:
                a = -np.log1p(-tau)
                out = a ** (-self.xi) / (-self.xi)
        return float(out) if np.ndim(out) == 0 else out

    def true_quantile(self, tau):
        """Marginal quantile of the response law itself."""
        tau = np.asarray(tau, dtype=float)
        if self.law == "exact_pareto":
            out = -(tau ** -self.xi) if self.xi > 0 else tau ** -self.xi
        elif self.law == "gev_bootstrap":
            out = np.asarray(gev_quantile(tau, self.xi))
        else:
            out = np.asarray(self.true_u_quantile(tau))
        return float(out) if np.ndim(out) == 0 else out

    def quantile_density(self, tau: float) -> float:
        """Derivative of the marginal quantile function (sparsity)."""
        if self.law == "cauchy":
            q = self.true_quantile(tau)
            return float(np.pi * (1.0 + q * q))
        if self.law == "student_t":
            return float(1.0 / student_t.pdf(student_t.ppf(tau, self.nu), self.nu))
        if self.law == "exact_pareto":
            return float(abs(self.xi) * tau ** (-self.xi - 1.0))
        if self.law == "uniform":
            return 1.0
        a = -np.log1p(-tau)
        return float(a ** (-self.xi - 1.0) / (1.0 - tau))

    def true_A(self, T: int | None = None) -> float:
        """Canonical scaling ``1 / Q_U(1/T)`` of the noise law."""
        n = self.T if T is None else T
        return float(1.0 / self.true_u_quantile(1.0 / n))

    def true_beta(self, tau: float) -> np.ndarray:
        """Conditional quantile coefficients of the location-scale design."""
        return self.normalized_gamma() * self.true_quantile(tau)


def generate(design: SimDesign) -> Dataset:
    """Draw one reproducible dataset from the design."""
    rng = np.random.default_rng(design.seed)
    if design.d_x == 1:
        u = _draw_law(design, rng, design.T)
        X = np.ones((design.T, 1))
        names = ["intercept"]
        return Dataset(u, X, column_names=names)
    X = np.column_stack(
        [np.ones(design.T)]
        + [rng.uniform(0.5, 1.5, design.T) for _ in range(design.d_x - 1)]
    )
    u = _draw_law(design, rng, design.T)
    y = (X @ design.normalized_gamma()) * u
    names = ["intercept"] + [f"x{j}" for j in range(1, design.d_x)]
    return Dataset(y, X, column_names=names)


def _draw_law(design: SimDesign, rng, size: int) -> np.ndarray:
    if design.law == "cauchy":
        return rng.standard_cauchy(size)
    if design.law == "student_t":
        return rng.standard_t(design.nu, size)
    if design.law == "gev_bootstrap":
        e = rng.standard_exponential(size)
        return np.expm1(-design.xi * np.log(e)) / (-design.xi)
    # Inverse transform on a strictly interior uniform lattice, so the
    # probability-integral transform is exact and endpoints never blow up.
    v = (rng.integers(0, 1 << 53, size=size) + 0.5) * 2.0 ** -53
    if design.law == "uniform":
        return v
    return np.asarray(design.true_quantile(v))


def approximation_quality_study(
    design: SimDesign,
    tau_list,
    n_mc: int = 10000,
    seed: int = 0,
    deciles=(0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9),
) -> list[dict]:
    """Compare EV and normal approximations to the exact law of sample quantiles.

    For each ``tau``, the exact finite-sample distribution of the sample
    quantile is estimated from ``n_mc`` fresh replications; the EV
    approximation simulates the limit law scaled by the design's canonical
    constant; the normal approximation uses the classical central-order
    variance. The summary is the sup-discrepancy across deciles of each
    approximation against the exact Monte Carlo quantiles.
    """
    if design.d_x != 1:
        raise ConfigError("the approximation study uses marginal designs")
    if n_mc < 1000:
        raise DomainError("need at least 1000 replications")
    deciles = np.asarray(deciles, dtype=float)
    children = np.random.SeedSequence(seed).spawn(2 * len(tau_list))
    rows = []
    for i, tau in enumerate(tau_list):
        k = tau * design.T
        rng = np.random.default_rng(children[2 * i])
        s = quantile_order(tau, design.T)
        exact = np.empty(n_mc)
        for r in range(n_mc):
            y = _draw_law(design, rng, design.T)
            exact[r] = np.partition(y, s - 1)[s - 1]
        exact.sort()
        exact_q = _left_quantiles(exact, deciles)

        cfg = EVLimitConfig(k=k, xi=design.true_xi, S=n_mc,
                            seed=int(children[2 * i + 1].generate_state(1)[0]))
        ev_draws = ev_limit_simulate(cfg, mode="CN").draws
        ev_vals = np.sort(design.true_quantile(tau) + ev_draws / design.true_A())
        ev_q = _left_quantiles(ev_vals, deciles)

        sd = np.sqrt(tau * (1.0 - tau) / design.T) * design.quantile_density(tau)
        normal_q = design.true_quantile(tau) + sd * norm.ppf(deciles)

        rows.append({
            "tau": float(tau),
            "order": float(k),
            "ev_sup": float(np.max(np.abs(ev_q - exact_q))),
            "normal_sup": float(np.max(np.abs(normal_q - exact_q))),
            "deciles": deciles.tolist(),
            "exact_q": exact_q.tolist(),
            "ev_q": ev_q.tolist(),
            "normal_q": normal_q.tolist(),
        })
    return rows


def coverage_study(
    design: SimDesign,
    method: str,
    tau: float,
    level: float = 0.90,
    n_mc: int = 500,
    S: int | None = None,
    b: int | None = None,
    p: int = 5,
    seed: int = 0,
    xi_estimator: str = "hill",
) -> dict:
    """Empirical coverage and width of one inference method on one design.

    The target is the marginal quantile for ``d_x == 1`` and the design-mean
    conditional quantile for location-scale designs. The method string is
    one of ``subsampling_sn``, ``subsampling_cn``, ``bootstrap_sn``,
    ``analytical_sn``, ``normal``.
    """
    if method not in COVERAGE_METHODS:
        raise ConfigError(f"method must be one of {COVERAGE_METHODS}")
    n_draws = S if S is not None else (200 if method == "analytical_sn" else 500)
    bsize = b if b is not None else default_subsample_size(design.T)
    truth = (design.true_quantile(tau) if design.d_x == 1
             else float(np.ones(design.d_x) @ design.true_beta(tau)))
    children = np.random.SeedSequence(seed).spawn(n_mc)
    covered = 0
    width = 0.0
    n_used = 0
    for child in children:
        sub_seed = int(child.generate_state(1)[0])
        data = generate(replace(design, seed=sub_seed))
        try:
            res = _single_ci(design, data, method, tau, level, n_draws, bsize, p,
                             sub_seed, xi_estimator)
        except (DomainError, ApplicabilityError):
            continue
        covered += int(res.lower <= truth <= res.upper)
        width += res.upper - res.lower
        n_used += 1
    if n_used == 0:
        raise DomainError("all replications failed; the design/method pairing is infeasible")
    return {
        "method": method, "tau": float(tau), "level": float(level),
        "coverage": covered / n_used, "avg_width": width / n_used,
        "n_mc": n_used, "failed": n_mc - n_used,
    }


def recentering_divergence_study(
    design: SimDesign,
    T_list=(500, 2000, 8000),
    n_datasets: int = 50,
    S: int = 100,
    tau_order: float = 5.0,
    seed: int = 0,
) -> dict:
    """Negative control: variance of canonically scaled subsampling draws.

    For each sample size, pools draws across independent datasets for the
    two recentering schemes using the design's exact canonical constant for
    the subsample size. With a heavy lower tail, recentering at the
    full-sample ``tau``-quantile makes the pooled draw variance explode with
    ``T`` while the subsample-adjusted recentering stays stable.
    """
    out = {}
    children = np.random.SeedSequence(seed).spawn(len(T_list))
    for T, child in zip(T_list, children):
        tau = tau_order / T
        b = default_subsample_size(T)
        cfg = SubsampleConfig(b=b, S=S)
        A_b = design.true_A(b)
        conv, extr = [], []
        for ds_seed in child.spawn(n_datasets):
            s = int(ds_seed.generate_state(1)[0])
            data = generate(replace(design, seed=s, T=T))
            for mode, sink in (("conventional", conv), ("extremal", extr)):
                sample = extremal_subsampling_marginal(
                    data.y, tau, cfg, statistic="CN", A_b_hat=A_b, seed=s + 1,
                    recenter=mode)
                sink.append(sample.draws)
        out[T] = {
            "conventional_var": float(np.var(np.concatenate(conv))),
            "extremal_var": float(np.var(np.concatenate(extr))),
        }
    return out


def _single_ci(design, data, method, tau, level, n_draws, bsize, p, seed, xi_estimator):
    y = data.y
    T = data.T
    if design.d_x > 1:
        return _single_ci_regression(design, data, method, tau, level, n_draws,
                                     bsize, p, seed)
    if method == "normal":
        xi_hat = _estimate_xi(y, tau, T, xi_estimator)
        return normal_approx_ci_marginal(y, tau, xi_hat, p=p, level=level)
    raw = sample_quantile(y, tau)
    if method == "subsampling_sn":
        scaling = sn_scaling_marginal(y, tau, p=p)
        sample = extremal_subsampling_marginal(
            y, tau, SubsampleConfig(b=bsize, S=n_draws), statistic="SN", p=p, seed=seed)
        return bias_correct_and_ci(raw, sample, scaling, level)
    if method == "subsampling_cn":
        tau_tilde = select_tau_tilde(tau, T, 1)
        model = estimate_tail_model_marginal(y, tau_tilde, estimator=xi_estimator)
        sample = extremal_subsampling_marginal(
            y, tau, SubsampleConfig(b=bsize, S=n_draws), statistic="CN",
            A_b_hat=model.scale_constant(bsize), seed=seed)
        return bias_correct_and_ci(raw, sample, model.A_T, level)
    xi_hat = _estimate_xi(y, tau, T, xi_estimator)
    if method == "bootstrap_sn":
        scaling = sn_scaling_marginal(y, tau, p=p)
        sample = extremal_bootstrap_marginal(xi_hat, tau, T, S=n_draws, seed=seed, p=p)
        return bias_correct_and_ci(raw, sample, scaling, level)
    # analytical_sn
    scaling = sn_scaling_marginal(y, tau, p=p)
    cfg = EVLimitConfig(k=tau * T, xi=xi_hat, S=n_draws, seed=seed, p=p)
    sample = ev_limit_simulate(cfg, mode="SN")
    return bias_correct_and_ci(raw, sample, scaling, level)


def _single_ci_regression(design, data, method, tau, level, n_draws, bsize, p, seed):
    from .qr import fit_qr_arrays
    psi = np.ones(design.d_x)
    beta_hat = fit_qr_arrays(data.y, data.X, tau)
    raw = float(psi @ beta_hat)
    if method != "subsampling_sn":
        raise ConfigError("regression coverage supports the subsampling SN method")
    scaling = sn_scaling_regression(data, tau, p=p)
    sample = extremal_subsampling_qr(
        data, tau, SubsampleConfig(b=bsize, S=n_draws), statistic="SN", p=p,
        seed=seed, psi=psi, engine="lp")
    return bias_correct_and_ci(raw, sample, scaling, level)


def _estimate_xi(y, tau, T, xi_estimator):
    tau_tilde = select_tau_tilde(tau, T, 1)
    if xi_estimator == "hill":
        return hill_marginal(y, tau_tilde)
    if xi_estimator == "pickands":
        return pickands_marginal(y, tau_tilde)
    raise ConfigError(f"unknown tail estimator {xi_estimator!r}")


def _left_quantiles(sorted_draws: np.ndarray, probs: np.ndarray) -> np.ndarray:
    n = sorted_draws.size
    idx = np.ceil(probs * n - 1e-9).astype(int)
    idx = np.clip(idx, 1, n) - 1
    return sorted_draws[idx]
