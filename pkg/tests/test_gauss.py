"""Scenario construction, sampling, moment estimation, and closed-form W2."""

import numpy as np
import pytest

from bridgekit.gauss import (
    GaussianPair,
    SCENARIOS,
    bures_w2,
    empirical_moments,
    make_scenario,
    random_orthogonal,
    sample,
)


def analytic_w2_1d(mu_a, sig_a, mu_b, sig_b):
    return np.sqrt((mu_a - mu_b) ** 2 + (sig_a - sig_b) ** 2)


class TestMakeScenario:
    def test_identity_matches_construction(self):
        pair = make_scenario("identity", 5, 0.1, seed=3)
        assert np.array_equal(pair.sigma0, np.eye(5))
        assert np.array_equal(pair.sigma1, np.eye(5))
        assert np.array_equal(pair.mu1, -pair.mu0)
        assert np.linalg.norm(pair.mu0) == pytest.approx(0.1, abs=1e-12)

    def test_mean_norm_is_mean_scale_for_all_dims(self):
        for dim in (2, 5, 20):
            pair = make_scenario("identity", dim, 2.5, seed=0)
            assert np.linalg.norm(pair.mu0) == pytest.approx(2.5, abs=1e-12)

    def test_rotated_factor_is_orthogonal(self):
        rng = np.random.default_rng(11)
        for _ in range(5):
            q = random_orthogonal(6, rng)
            assert np.abs(q @ q.T - np.eye(6)).max() < 1e-10

    def test_high_condition_enforces_ratio(self):
        # Recompute eigenvalues of the emitted matrices.
        pair = make_scenario("high_condition", 5, 1.0, (0.01, 10.0), seed=4)
        for cov in (pair.sigma0, pair.sigma1):
            ev = np.linalg.eigvalsh(cov)
            assert ev.max() / ev.min() >= 100.0

    def test_diagonal_spectra_in_range(self):
        pair = make_scenario("diagonal", 8, 1.0, (0.3, 3.0), seed=5)
        for cov in (pair.sigma0, pair.sigma1):
            ev = np.diag(cov)
            assert np.all((ev >= 0.3) & (ev <= 3.0))
            assert np.array_equal(cov, np.diag(ev))

    def test_asymmetric_scales_differ(self):
        pair = make_scenario("asymmetric", 6, 1.0, (0.3, 3.0), seed=6, asym_scale=4.0)
        ev0 = np.linalg.eigvalsh(pair.sigma0)
        ev1 = np.linalg.eigvalsh(pair.sigma1)
        assert np.all((ev1 >= 4 * 0.3 - 1e-9) & (ev1 <= 4 * 3.0 + 1e-9))
        assert ev1.mean() > ev0.mean()

    def test_all_scenarios_produce_valid_pairs(self):
        for name in SCENARIOS:
            pair = make_scenario(name, 4, 0.5, seed=1)
            assert np.linalg.eigvalsh(pair.sigma0).min() > 0
            assert np.linalg.eigvalsh(pair.sigma1).min() > 0

    def test_seed_determinism_is_bit_identical(self):
        a = make_scenario("rotated", 7, 1.0, seed=42)
        b = make_scenario("rotated", 7, 1.0, seed=42)
        assert np.array_equal(a.sigma0, b.sigma0)
        assert np.array_equal(a.sigma1, b.sigma1)
        assert np.array_equal(a.mu0, b.mu0)

    def test_unknown_label_rejected(self):
        with pytest.raises(ValueError, match="unknown scenario"):
            make_scenario("banana", 3, 1.0)

    def test_bad_spectrum_rejected(self):
        with pytest.raises(ValueError, match="positive"):
            make_scenario("diagonal", 3, 1.0, (-1.0, 2.0))
        with pytest.raises(ValueError, match="low < high"):
            make_scenario("diagonal", 3, 1.0, (2.0, 2.0))


class TestGaussianPairType:
    def test_rejects_asymmetric_covariance(self):
        cov = np.eye(2)
        bad = cov.copy()
        bad[0, 1] = 1e-3
        with pytest.raises(ValueError, match="symmetric"):
            GaussianPair(2, np.zeros(2), bad, np.zeros(2), cov)

    def test_rejects_non_pd(self):
        with pytest.raises(ValueError, match="positive definite"):
            GaussianPair(2, np.zeros(2), np.diag([1.0, 0.0]), np.zeros(2), np.eye(2))

    def test_rejects_mismatched_means(self):
        with pytest.raises(ValueError, match="mu1"):
            GaussianPair(2, np.ones(2), np.eye(2), np.ones(2), np.eye(2))

    def test_json_round_trip(self):
        pair = make_scenario("rotated", 4, 1.0, seed=9)
        back = GaussianPair.from_json(pair.to_json())
        assert np.array_equal(back.sigma0, pair.sigma0)
        assert np.array_equal(back.mu0, pair.mu0)
        assert back.scenario_name == pair.scenario_name


class TestSample:
    def test_zero_rows(self):
        pair = make_scenario("identity", 5, 0.1)
        out = sample(pair, "source", 0, np.random.default_rng(0))
        assert out.shape == (0, 5)

    def test_mean_close_for_large_n(self):
        pair = make_scenario("identity", 5, 0.1, seed=2)
        X = sample(pair, "source", 100_000, np.random.default_rng(8))
        assert np.abs(X.mean(axis=0) - pair.mu0).max() < 0.02  # 3 / sqrt(n) bound

    def test_variances_close_for_diagonal(self):
        pair = make_scenario("diagonal", 5, 0.1, seed=2)
        X = sample(pair, "target", 100_000, np.random.default_rng(8))
        ratio = X.var(axis=0, ddof=1) / np.diag(pair.sigma1)
        assert np.abs(ratio - 1).max() < 0.05

    def test_deterministic_under_seed(self):
        pair = make_scenario("rotated", 3, 1.0, seed=5)
        a = sample(pair, "source", 100, np.random.default_rng(123))
        b = sample(pair, "source", 100, np.random.default_rng(123))
        assert np.array_equal(a, b)

    def test_bad_side(self):
        pair = make_scenario("identity", 2, 0.1)
        with pytest.raises(ValueError, match="side"):
            sample(pair, "middle", 1, np.random.default_rng(0))


class TestEmpiricalMoments:
    def test_two_point_formula(self):
        mean, cov = empirical_moments(np.array([[0.0, 0.0], [2.0, 2.0]]))
        assert np.array_equal(mean, [1.0, 1.0])
        assert np.allclose(cov, [[2.0, 2.0], [2.0, 2.0]])

    def test_constant_rows_zero_cov(self):
        mean, cov = empirical_moments(np.full((10, 3), 1.5))
        assert np.allclose(mean, 1.5)
        assert np.abs(cov).max() == 0.0

    def test_recovers_generating_moments(self):
        pair = make_scenario("rotated", 4, 1.0, seed=3)
        X = sample(pair, "source", 100_000, np.random.default_rng(1))
        _, cov = empirical_moments(X)
        rel = np.linalg.norm(cov - pair.sigma0) / np.linalg.norm(pair.sigma0)
        assert rel < 0.05

    def test_needs_two_rows(self):
        with pytest.raises(ValueError, match="n >= 2"):
            empirical_moments(np.ones((1, 3)))


class TestBuresW2:
    def test_identical_gaussians_zero(self):
        pair = make_scenario("rotated", 5, 1.0, seed=7)
        assert bures_w2(pair.mu0, pair.sigma0, pair.mu0, pair.sigma0) == pytest.approx(0.0, abs=1e-8)

    def test_pure_mean_shift_1d(self):
        assert bures_w2([0.0], [[1.0]], [2.0], [[1.0]]) == pytest.approx(2.0, abs=1e-12)

    def test_commuting_isotropic_case(self):
        # Sigma_a = I, Sigma_b = 4I in 2-d: per-dim (1-2)^2 summed, rooted.
        got = bures_w2(np.zeros(2), np.eye(2), np.zeros(2), 4 * np.eye(2))
        assert got == pytest.approx(np.sqrt(2.0), abs=1e-10)

    def test_matches_1d_analytic_formula(self):
        rng = np.random.default_rng(10)
        for _ in range(100):
            mu_a, mu_b = rng.normal(size=2)
            sig_a, sig_b = rng.uniform(0.2, 3.0, size=2)
            got = bures_w2([mu_a], [[sig_a**2]], [mu_b], [[sig_b**2]])
            assert got == pytest.approx(analytic_w2_1d(mu_a, sig_a, mu_b, sig_b), abs=1e-10)

    def test_commuting_diagonal_closed_form(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            d = 4
            mu_a, mu_b = rng.normal(size=(2, d))
            ev_a, ev_b = rng.uniform(0.1, 4.0, size=(2, d))
            got = bures_w2(mu_a, np.diag(ev_a), mu_b, np.diag(ev_b))
            want = np.sqrt(np.sum((mu_a - mu_b) ** 2) + np.sum((np.sqrt(ev_a) - np.sqrt(ev_b)) ** 2))
            assert got == pytest.approx(want, abs=1e-8)

    def test_symmetric_in_arguments(self):
        rng = np.random.default_rng(12)
        a = make_scenario("rotated", 4, 1.0, seed=1)
        b = make_scenario("rotated", 4, 2.0, seed=2)
        d_ab = bures_w2(a.mu0, a.sigma0, b.mu0, b.sigma0)
        d_ba = bures_w2(b.mu0, b.sigma0, a.mu0, a.sigma0)
        assert d_ab == pytest.approx(d_ba, abs=1e-8)

    def test_triangle_inequality_on_1d_triples(self):
        rng = np.random.default_rng(20)
        for _ in range(200):
            mus = rng.normal(size=3)
            sigs = rng.uniform(0.2, 3.0, size=3)
            covs = [[[s**2]] for s in sigs]
            d01 = bures_w2([mus[0]], covs[0], [mus[1]], covs[1])
            d12 = bures_w2([mus[1]], covs[1], [mus[2]], covs[2])
            d02 = bures_w2([mus[0]], covs[0], [mus[2]], covs[2])
            assert d02 <= d01 + d12 + 1e-10

    def test_rejects_non_symmetric(self):
        with pytest.raises(ValueError, match="symmetric"):
            bures_w2(np.zeros(2), [[1.0, 0.5], [0.0, 1.0]], np.zeros(2), np.eye(2))
