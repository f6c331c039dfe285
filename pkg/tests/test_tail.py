"""Tail-index estimators, tail constants, and their confidence intervals."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from extremalqr import (
    Dataset,
    estimate_A_T,
    estimate_gamma,
    estimate_L,
    estimate_tail_model,
    estimate_tail_model_marginal,
    fit_qr,
    hill_marginal,
    hill_regression,
    pickands_marginal,
    pickands_regression,
    select_tau_tilde,
    xi_confidence_interval,
)
from extremalqr.errors import ApplicabilityError, DegenerateSpacingError, DomainError
from extremalqr.qr import fit_qr_process
from extremalqr.tail import pickands_from_quantiles, pickands_variance

from oracles import pareto_order_stat_values

LN2 = np.log(2.0)


class TestPickandsMarginal:
    def test_spacing_ratio_half(self):
        assert pickands_from_quantiles(-8.0, -4.0, -2.0) == pytest.approx(1.0)

    def test_equal_spacings_give_zero(self):
        assert pickands_from_quantiles(-3.0, -2.0, -1.0) == pytest.approx(0.0)

    def test_degenerate_spacing_raises(self):
        with pytest.raises(DegenerateSpacingError):
            pickands_from_quantiles(-1.0, -1.0, 0.0)

    @pytest.mark.parametrize("xi", [-1.0, -0.5, 0.5, 1.0, 2.0])
    def test_exact_on_powerlaw_quantiles(self, xi):
        y = pareto_order_stat_values(1000, xi)
        assert pickands_marginal(y, 0.05) == pytest.approx(xi, abs=1e-12)

    def test_monte_carlo_pareto(self):
        # xi = 0.5, T = 1e4, threshold 0.05: within 3 asymptotic s.e. of the
        # truth in at least 99% of seeds.
        xi, T, tau = 0.5, 10_000, 0.05
        se = np.sqrt(pickands_variance(xi) / (tau * T))
        hits = 0
        n_seeds = 500
        root = np.random.SeedSequence(2024)
        for child in root.spawn(n_seeds):
            rng = np.random.default_rng(child)
            y = -(rng.random(T) ** -xi)
            hits += abs(pickands_marginal(y, tau) - xi) <= 3 * se
        assert hits / n_seeds >= 0.99

    @settings(max_examples=50, deadline=None)
    @given(
        a=st.floats(-5, 5),
        b=st.floats(0.01, 10),
        xi=st.sampled_from([-1.0, -0.5, 0.5, 1.0]),
    )
    def test_affine_invariance(self, a, b, xi):
        y = pareto_order_stat_values(400, xi)
        base = pickands_marginal(y, 0.05)
        shifted = pickands_marginal(a + b * y, 0.05)
        assert shifted == pytest.approx(base, rel=1e-9, abs=1e-9)


class TestHillMarginal:
    def test_constant_log_ratio_one(self):
        # 49 tail points at e * threshold, threshold -1 at rank 50 of 1000
        y = np.concatenate([np.full(49, -np.e), [-1.0], np.linspace(0.0, 5.0, 950)])
        assert hill_marginal(y, 0.05) == pytest.approx(1.0)

    def test_constant_log_ratio_half(self):
        y = np.concatenate([np.full(49, -np.exp(0.5)), [-1.0], np.linspace(0.0, 5.0, 950)])
        assert hill_marginal(y, 0.05) == pytest.approx(0.5)

    def test_positive_threshold_rejected(self):
        y = np.linspace(1.0, 10.0, 200)
        with pytest.raises(ApplicabilityError):
            hill_marginal(y, 0.1)

    def test_literal_variant_sign_and_scale(self):
        y = np.concatenate([np.full(49, -np.e), [-1.0], np.linspace(0.0, 5.0, 950)])
        literal = hill_marginal(y, 0.05, literal=True)
        assert literal == pytest.approx(-1.0 / 0.05)

    def test_monte_carlo_cauchy(self):
        # Cauchy lower tail has xi = 1; moment estimator within 3*xi/sqrt(k)
        xi, T, tau = 1.0, 10_000, 0.05
        se = xi / np.sqrt(tau * T)
        hits = 0
        n_seeds = 500
        for child in np.random.SeedSequence(77).spawn(n_seeds):
            rng = np.random.default_rng(child)
            y = rng.standard_cauchy(T)
            hits += abs(hill_marginal(y, tau) - xi) <= 3 * se
        assert hits / n_seeds >= 0.99

    def test_scale_invariance_not_location(self):
        rng = np.random.default_rng(5)
        y = rng.standard_cauchy(5000)
        base = hill_marginal(y, 0.05)
        assert hill_marginal(3.0 * y, 0.05) == pytest.approx(base, rel=1e-12)
        shifted = hill_marginal(y - 10.0, 0.05)
        assert abs(shifted - base) > 1e-3


class TestRegressionVariants:
    def _location_scale(self, seed=0, T=10_000, xi=0.5):
        rng = np.random.default_rng(seed)
        X = np.column_stack([np.ones(T), rng.uniform(0.5, 1.5, T)])
        gamma = np.array([0.5, 0.5])
        u = -(rng.random(T) ** -xi)
        return Dataset((X @ gamma) * u, X), gamma

    def test_pickands_regression_matches_marginal_intercept_only(self):
        y = pareto_order_stat_values(1000, 0.5)
        data = Dataset(y, np.ones((1000, 1)))
        fits = fit_qr_process(data, [0.05, 0.10, 0.20])
        reg = pickands_regression(fits, data.xbar)
        marg = pickands_marginal(y, 0.05)
        assert reg == pytest.approx(marg, abs=1e-9)

    def test_pickands_regression_printed_example(self):
        fits = fit_qr_process(
            Dataset(pareto_order_stat_values(1000, 1.0), np.ones((1000, 1))),
            [0.0501, 0.1001, 0.2001],
        )
        # engineered projections (-8, -4, -2) via direct quantile values
        assert pickands_from_quantiles(-8.0, -4.0, -2.0) == pytest.approx(1.0)
        assert pickands_regression(fits, np.array([1.0])) == pytest.approx(1.0, abs=0.05)

    def test_hill_regression_matches_marginal_intercept_only(self):
        rng = np.random.default_rng(11)
        y = rng.standard_cauchy(2000)
        data = Dataset(y, np.ones((2000, 1)))
        fit = fit_qr(data, 0.05)
        reg = hill_regression(data, fit)
        # the regression threshold is the ceil-rank order statistic; compare
        # against the marginal moment form at that exact threshold
        thr = fit.beta[0]
        tail = y[y < thr]
        assert reg == pytest.approx(float(np.mean(np.log(tail / thr))), rel=1e-12)

    def test_hill_regression_location_scale(self):
        data, _ = self._location_scale(seed=3, xi=0.5)
        fit = fit_qr(data, 0.05)
        xi_hat = hill_regression(data, fit)
        assert xi_hat == pytest.approx(0.5, abs=3 * 0.5 / np.sqrt(0.05 * data.T))

    def test_pickands_regression_location_scale(self):
        data, _ = self._location_scale(seed=4, xi=0.5)
        fits = fit_qr_process(data, [0.05, 0.10, 0.20])
        xi_hat = pickands_regression(fits, data.xbar)
        se = np.sqrt(pickands_variance(0.5) / (0.05 * data.T))
        assert xi_hat == pytest.approx(0.5, abs=4 * se)

    def test_estimate_gamma_normalization_and_truth(self):
        data, gamma = self._location_scale(seed=5, xi=0.5)
        fits = fit_qr_process(data, [0.05, 0.10])
        g = estimate_gamma(fits[0], fits[1], data.xbar)
        assert float(data.xbar @ g) == pytest.approx(1.0, abs=1e-12)
        truth = gamma / (data.xbar @ gamma)
        np.testing.assert_allclose(g, truth, atol=0.05)

    def test_estimate_gamma_intercept_only(self):
        data = Dataset(pareto_order_stat_values(500, 1.0), np.ones((500, 1)))
        fits = fit_qr_process(data, [0.05, 0.10])
        np.testing.assert_allclose(estimate_gamma(fits[0], fits[1], data.xbar), [1.0])


class TestTailConstants:
    def test_L_exact_pareto_heavy(self):
        # spacing from Q(tau) = -1/tau at threshold 0.1
        spacing = (-1 / 0.2) - (-1 / 0.1)
        assert estimate_L(spacing, 1.0, 0.1) == pytest.approx(-1.0)

    def test_L_exact_uniform(self):
        spacing = 0.1  # Q(tau) = tau
        assert estimate_L(spacing, -1.0, 0.1) == pytest.approx(1.0)

    def test_L_unidentified_at_zero(self):
        with pytest.raises(DomainError):
            estimate_L(1.0, 0.0, 0.1)

    def test_A_T_arithmetic(self):
        assert estimate_A_T(1.0, 0.0, 100) == pytest.approx(1.0)
        assert estimate_A_T(2.0, 1.0, 100) == pytest.approx(0.02)

    def test_marginal_pipeline_recovers_A_T(self):
        # exact power-law sample: A_T should approach 1/Q_U(1/T) = -T^(-xi)
        xi, T = 1.0, 20_000
        y = pareto_order_stat_values(T, xi)
        model = estimate_tail_model_marginal(y, 0.05, estimator="pickands")
        assert model.xi == pytest.approx(xi, abs=1e-10)
        assert model.A_T == pytest.approx(-(T ** -xi), rel=0.05)

    def test_tail_model_regression_consistency(self):
        rng = np.random.default_rng(9)
        T = 5000
        X = np.column_stack([np.ones(T), rng.uniform(0.5, 1.5, T)])
        u = -(rng.random(T) ** -0.5)
        data = Dataset((X @ [0.5, 0.5]) * u, X)
        model = estimate_tail_model(data, 0.05, estimator="hill")
        assert model.xi == pytest.approx(0.5, abs=0.1)
        assert float(data.xbar @ model.gamma) == pytest.approx(1.0, abs=1e-12)
        assert model.A_T == pytest.approx(model.L * T ** -model.xi)

    def test_upper_tail_via_negation(self):
        rng = np.random.default_rng(10)
        y = rng.standard_cauchy(20_000)
        lo = estimate_tail_model_marginal(y, 0.05, estimator="hill", side="lower")
        hi = estimate_tail_model_marginal(y, 0.05, estimator="hill", side="upper")
        assert lo.xi == pytest.approx(1.0, abs=0.2)
        assert hi.xi == pytest.approx(1.0, abs=0.2)


class TestConfidenceIntervals:
    def test_hill_printed_example(self):
        ci = xi_confidence_interval(0.5, "hill", 0.05, 10_000, level=0.90)
        assert ci.std_error == pytest.approx(0.5 / np.sqrt(500), rel=1e-12)
        assert ci.lower == pytest.approx(0.4632, abs=2e-4)
        assert ci.upper == pytest.approx(0.5368, abs=2e-4)

    def test_pickands_variance_limit_at_zero(self):
        # numeric limit of the variance display as xi -> 0
        numeric = [pickands_variance(x) for x in (1e-4, 1e-5, 1e-6)]
        closed = 3.0 / (4.0 * LN2**4)
        np.testing.assert_allclose(numeric, closed, rtol=1e-3)
        assert pickands_variance(0.0) == pytest.approx(closed)

    def test_width_scales_with_threshold_count(self):
        wide = xi_confidence_interval(0.5, "hill", 0.01, 10_000)
        narrow = xi_confidence_interval(0.5, "hill", 0.04, 10_000)
        assert (wide.upper - wide.lower) == pytest.approx(
            2.0 * (narrow.upper - narrow.lower), rel=1e-12)

    def test_small_threshold_count_warns(self):
        with pytest.warns(UserWarning, match="< 30"):
            xi_confidence_interval(0.5, "hill", 0.01, 1000)

    def test_coverage_hill_pareto(self):
        # 90% CI covers the truth with frequency in [0.85, 0.95]
        xi, T, tau = 0.5, 10_000, 0.05
        hits = 0
        n_seeds = 500
        for child in np.random.SeedSequence(31).spawn(n_seeds):
            rng = np.random.default_rng(child)
            y = -(rng.random(T) ** -xi)
            ci = xi_confidence_interval(hill_marginal(y, tau), "hill", tau, T, 0.90)
            hits += ci.lower <= xi <= ci.upper
        assert 0.85 <= hits / n_seeds <= 0.95


class TestSelectTauTilde:
    def test_target_already_feasible(self):
        assert select_tau_tilde(0.05, 1000, 1) == pytest.approx(0.05)

    def test_floor_binds(self):
        assert select_tau_tilde(0.01, 1000, 1) == pytest.approx(0.03)

    def test_dimension_adjustment(self):
        assert select_tau_tilde(0.05, 1738, 7) == pytest.approx(210 / 1738)

    def test_infeasible_sample_warns(self):
        with pytest.warns(UserWarning, match="too small"):
            out = select_tau_tilde(0.05, 100, 7)
        assert out == 0.5
