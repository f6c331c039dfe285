"""Check-loss kernel: sample quantiles, regression fits, solver exactness."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from extremalqr import Dataset, check_loss, fit_qr, fit_qr_process, sample_quantile
from extremalqr.errors import DomainError
from extremalqr.qr import quantile_order

from oracles import best_order_statistic, check_loss_direct, vertex_enumeration_qr


class TestCheckLoss:
    def test_printed_values(self):
        assert check_loss(2, 0.5) == 1.0
        assert check_loss(-1, 0.1) == pytest.approx(0.9)
        for tau in (0.01, 0.37, 0.99):
            assert check_loss(0.0, tau) == 0.0

    def test_vectorized_matches_direct(self):
        rng = np.random.default_rng(0)
        u = rng.standard_normal(100)
        np.testing.assert_allclose(check_loss(u, 0.3), check_loss_direct(u, 0.3))

    def test_rejects_bad_inputs(self):
        with pytest.raises(DomainError):
            check_loss(np.nan, 0.5)
        with pytest.raises(DomainError):
            check_loss(1.0, 0.0)
        with pytest.raises(DomainError):
            check_loss(1.0, 1.0)

    @settings(max_examples=200, deadline=None)
    @given(
        u=st.floats(-50, 50),
        v=st.floats(-50, 50),
        lam=st.floats(0, 1),
        tau=st.floats(0.01, 0.99),
    )
    def test_convexity(self, u, v, lam, tau):
        mix = check_loss(lam * u + (1 - lam) * v, tau)
        assert mix <= lam * check_loss(u, tau) + (1 - lam) * check_loss(v, tau) + 1e-9

    @settings(max_examples=100, deadline=None)
    @given(u=st.floats(-50, 50), tau=st.floats(0.01, 0.99))
    def test_nonnegative_zero_iff_zero(self, u, tau):
        val = check_loss(u, tau)
        assert val >= 0.0
        if u != 0.0:
            assert val > 0.0


class TestSampleQuantile:
    def test_printed_values(self):
        assert sample_quantile(np.array([1.0, 2.0, 3.0, 4.0]), 0.5) == 2.0
        assert sample_quantile(np.array([3.0, 1.0, 2.0]), 1 / 3) == 1.0

    def test_empty_rejected(self):
        with pytest.raises(DomainError):
            sample_quantile(np.array([]), 0.5)

    def test_tau_t_below_one_clamps_with_warning(self):
        y = np.arange(10.0)
        with pytest.warns(UserWarning, match="extrapolation"):
            assert sample_quantile(y, 0.05) == 0.0

    def test_order_epsilon_guard(self):
        # 0.7 * 10 is 6.999... in floats; the rank must still be 7
        assert quantile_order(0.7, 10) == 7
        assert quantile_order(0.1, 500) == 50

    def test_relation_to_check_loss_argmin(self):
        # The printed order-statistic convention takes the floor rank; the
        # exact arg-min sits at the ceil rank, one order statistic away for
        # non-integral tau*T and equal at integral tau*T.
        rng = np.random.default_rng(42)
        y = rng.standard_normal(7)
        tau = 0.3
        argmin_val, _ = best_order_statistic(y, tau)
        ys = np.sort(y)
        assert argmin_val == ys[int(np.ceil(tau * 7)) - 1]
        assert sample_quantile(y, tau) == ys[int(np.floor(tau * 7)) - 1]

        # integral order: the floor convention is itself a minimizer
        y8 = rng.standard_normal(8)
        argmin_val8, obj8 = best_order_statistic(y8, 0.5)
        q8 = sample_quantile(y8, 0.5)
        assert check_loss_direct(y8 - q8, 0.5).sum() == pytest.approx(obj8)

    @pytest.mark.filterwarnings("ignore:tau\\*T < 1")
    @settings(max_examples=100, deadline=None)
    @given(
        data=st.lists(st.floats(-100, 100), min_size=2, max_size=25),
        tau=st.floats(0.05, 0.95),
    )
    def test_returns_an_observed_value(self, data, tau):
        y = np.asarray(data)
        assert sample_quantile(y, tau) in y


def _dataset(rng, T, d):
    X = np.column_stack([np.ones(T)] + [rng.uniform(-1, 1, T) for _ in range(d - 1)])
    y = X @ rng.standard_normal(d) + rng.standard_cauchy(T)
    return Dataset(y, X)


class TestFitQR:
    def test_intercept_only_median(self):
        data = Dataset(np.array([1.0, 2.0, 9.0]), np.ones((3, 1)))
        fit = fit_qr(data, 0.5)
        assert fit.beta[0] == pytest.approx(2.0, abs=1e-9)

    @pytest.mark.filterwarnings("ignore:tau\\*T < 1")
    def test_two_point_interpolation(self):
        data = Dataset(np.array([1.0, 3.0]), np.array([[1.0, 0.0], [1.0, 1.0]]))
        for tau in (0.2, 0.5, 0.8):
            fit = fit_qr(data, tau)
            np.testing.assert_allclose(fit.beta, [1.0, 2.0], atol=1e-9)
            assert fit.objective == pytest.approx(0.0, abs=1e-10)

    def test_matches_vertex_enumeration(self):
        rng = np.random.default_rng(1)
        data = _dataset(rng, 10, 2)
        fit = fit_qr(data, 0.25)
        _, oracle_obj = vertex_enumeration_qr(data.y, data.X, 0.25)
        assert fit.objective == pytest.approx(oracle_obj, abs=1e-9)

    def test_rank_deficient_rejected(self):
        X = np.column_stack([np.ones(5), np.arange(5.0), 2 * np.arange(5.0)])
        with pytest.raises(DomainError, match="rank"):
            Dataset(np.arange(5.0), X)

    def test_subgradient_box(self):
        rng = np.random.default_rng(3)
        for trial in range(20):
            T, d = 30, 3
            data = _dataset(rng, T, d)
            tau = float(rng.uniform(0.1, 0.9))
            fit = fit_qr(data, tau)
            assert fit.n_zero_residuals <= d
            assert tau - d / T - 1e-9 <= fit.negative_share <= tau + 1e-9

    def test_scale_equivariance(self):
        rng = np.random.default_rng(4)
        data = _dataset(rng, 25, 2)
        fit = fit_qr(data, 0.3)
        scaled = fit_qr(Dataset(5.0 * data.y, data.X), 0.3)
        np.testing.assert_allclose(scaled.beta, 5.0 * fit.beta, rtol=1e-8, atol=1e-8)

    def test_shift_equivariance(self):
        rng = np.random.default_rng(5)
        data = _dataset(rng, 25, 2)
        delta = np.array([1.5, -2.0])
        fit = fit_qr(data, 0.3)
        shifted = fit_qr(Dataset(data.y + data.X @ delta, data.X), 0.3)
        np.testing.assert_allclose(shifted.beta, fit.beta + delta, rtol=1e-8, atol=1e-8)

    def test_warns_below_one_effective_observation(self):
        rng = np.random.default_rng(6)
        data = _dataset(rng, 20, 2)
        with pytest.warns(UserWarning, match="extrapolation"):
            fit_qr(data, 0.01)


class TestFitQRProcess:
    def test_monotone_intercept_path(self):
        data = Dataset(np.array([1.0, 2.0, 3.0, 4.0]), np.ones((4, 1)))
        fits = fit_qr_process(data, [0.25, 0.5])
        assert fits[0].beta[0] <= fits[1].beta[0]

    def test_single_tau_degenerate_batch(self):
        rng = np.random.default_rng(7)
        data = _dataset(rng, 15, 2)
        single = fit_qr_process(data, [0.4])[0]
        direct = fit_qr(data, 0.4)
        np.testing.assert_array_equal(single.beta, direct.beta)

    def test_bitwise_equals_loop(self):
        rng = np.random.default_rng(8)
        data = _dataset(rng, 40, 2)
        taus = [0.1, 0.3, 0.5, 0.7]
        batch = fit_qr_process(data, taus)
        for tau, fit in zip(taus, batch):
            np.testing.assert_array_equal(fit.beta, fit_qr(data, tau).beta)

    def test_requires_increasing_grid(self):
        data = Dataset(np.array([1.0, 2.0, 3.0]), np.ones((3, 1)))
        with pytest.raises(DomainError):
            fit_qr_process(data, [0.5, 0.5])

    def test_error_annotated_with_tau(self):
        data = Dataset(np.array([1.0, 2.0, 3.0]), np.ones((3, 1)))
        with pytest.raises(DomainError, match="tau=2"):
            fit_qr_process(data, [0.5, 2.0])
