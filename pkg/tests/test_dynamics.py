"""Fixed-step ODE integrators and the Euler-Maruyama sampler."""

import math

import numpy as np
import pytest

from bridgekit.dynamics import IntegratorConfig, euler_maruyama, integrate_ode, transport_samples


def decay(x, t):
    return -x


class TestIntegrateOde:
    def test_constant_drift_is_exact_for_euler(self):
        c = np.array([0.5, -2.0])
        for steps in (1, 7, 20):
            out = integrate_ode(lambda x, t: c, np.zeros(2), IntegratorConfig("euler", steps))
            assert np.abs(out - c).max() < 1e-12

    def test_euler_decay_matches_recurrence_bitwise(self):
        out = integrate_ode(decay, np.array([1.0]), IntegratorConfig("euler", 20))
        ref = 1.0
        h = 1.0 / 20
        for _ in range(20):
            ref = ref + h * (-ref)
        assert out[0] == ref  # same arithmetic, bit for bit
        assert math.isclose(out[0], (1 - 1 / 20) ** 20, rel_tol=1e-14)

    def test_rk4_decay_close_to_exact(self):
        out = integrate_ode(decay, np.array([1.0]), IntegratorConfig("rk4", 20))
        assert abs(out[0] - math.exp(-1)) < 1e-6

    def test_rk4_fourth_order_convergence(self):
        errors = []
        for steps in (5, 10, 20):
            out = integrate_ode(decay, np.array([1.0]), IntegratorConfig("rk4", steps))
            errors.append(abs(out[0] - math.exp(-1)))
        assert errors[0] / errors[1] > 12.0
        assert errors[1] / errors[2] > 12.0

    def test_time_reversal_error_halves_with_steps(self):
        # Forward xdot = A x then backward xdot = -A x returns x0 with O(1/K) error.
        rng = np.random.default_rng(0)
        A = 0.5 * rng.standard_normal((3, 3))
        x0 = rng.standard_normal(3)

        def roundtrip_error(steps):
            fwd = integrate_ode(lambda x, t: x @ A.T, x0, IntegratorConfig("euler", steps))
            back = integrate_ode(lambda x, t: -(x @ A.T), fwd, IntegratorConfig("euler", steps))
            return np.linalg.norm(back - x0)

        e1, e2 = roundtrip_error(40), roundtrip_error(80)
        assert e2 < 0.6 * e1  # halving within slack

    def test_batch_integration_matches_rowwise(self):
        rng = np.random.default_rng(1)
        X0 = rng.standard_normal((5, 3))
        cfg = IntegratorConfig("rk4", 10)
        batch = integrate_ode(decay, X0, cfg)
        rows = np.stack([integrate_ode(decay, row, cfg) for row in X0])
        assert np.array_equal(batch, rows)

    def test_nan_guard_reports_step(self):
        def blowup(x, t):
            return x * np.inf

        with pytest.raises(FloatingPointError, match="step 0"):
            integrate_ode(blowup, np.ones(2), IntegratorConfig("euler", 5))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            IntegratorConfig("midpoint", 10)
        with pytest.raises(ValueError):
            IntegratorConfig("euler", 0)
        with pytest.raises(ValueError):
            IntegratorConfig("euler", 10, t_start=1.0, t_end=0.0)


class TestTransportSamples:
    def test_empty_batch(self):
        out = transport_samples(decay, np.empty((0, 4)))
        assert out.shape == (0, 4)

    def test_matches_integrate(self):
        rng = np.random.default_rng(2)
        X0 = rng.standard_normal((10, 2))
        cfg = IntegratorConfig("euler", 20)
        assert np.array_equal(transport_samples(decay, X0, cfg), integrate_ode(decay, X0, cfg))


class TestEulerMaruyama:
    def test_sigma_zero_equals_euler(self):
        rng = np.random.default_rng(3)
        X0 = rng.standard_normal((6, 3))
        em = euler_maruyama(decay, 0.0, X0, 20, np.random.default_rng(0))
        ode = integrate_ode(decay, X0, IntegratorConfig("euler", 20))
        assert np.array_equal(em, ode)

    def test_zero_drift_statistics(self):
        # Terminal law is N(x0, sigma^2): variance 1.0 within 3%, mean within 0.02.
        def zero(x, t):
            return np.zeros_like(x)

        x0 = np.full((100_000, 2), 1.5)
        out = euler_maruyama(zero, 1.0, x0, 100, np.random.default_rng(4))
        assert np.abs(out.var(axis=0, ddof=1) - 1.0).max() < 0.03
        assert np.abs(out.mean(axis=0) - 1.5).max() < 0.02

    def test_bit_reproducible_under_seed(self):
        rng = np.random.default_rng(5)
        X0 = rng.standard_normal((8, 2))
        a = euler_maruyama(decay, 0.7, X0, 30, np.random.default_rng(99))
        b = euler_maruyama(decay, 0.7, X0, 30, np.random.default_rng(99))
        assert np.array_equal(a, b)

    def test_trajectory_shape_and_start(self):
        X0 = np.ones((4, 3))
        path = euler_maruyama(decay, 0.5, X0, 10, np.random.default_rng(6), keep_trajectory=True)
        assert path.shape == (4, 11, 3)
        assert np.array_equal(path[:, 0, :], X0)

    def test_reverse_time_grid(self):
        seen = []

        def spy(x, t):
            seen.append(t)
            return np.zeros_like(x)

        euler_maruyama(spy, 0.0, np.ones((1, 1)), 4, np.random.default_rng(0), reverse_time=True)
        assert seen == [1.0, 0.75, 0.5, 0.25]

    def test_negative_sigma_rejected(self):
        with pytest.raises(ValueError, match="sigma"):
            euler_maruyama(decay, -1.0, np.ones((1, 1)), 10, np.random.default_rng(0))

    def test_single_vector_input(self):
        out = euler_maruyama(decay, 0.0, np.ones(3), 10, np.random.default_rng(0))
        assert out.shape == (3,)
