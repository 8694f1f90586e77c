"""Ridge solver, clipping, CI statistics and the seeded stream."""

import math

import numpy as np
import pytest

from xanfis.numerics import (
    InsufficientDataError,
    RandomStream,
    SingularMatrixError,
    clip_elementwise,
    mean_ci95,
    ridge_solve,
)


class TestRidgeSolve:
    def test_identity_design_lambda_zero(self):
        w = ridge_solve(np.eye(2), [1.0, 2.0], 0.0)
        np.testing.assert_allclose(w, [1.0, 2.0], rtol=0, atol=1e-14)

    def test_identity_design_lambda_one(self):
        # (I + I)^-1 y
        w = ridge_solve(np.eye(2), [1.0, 2.0], 1.0)
        np.testing.assert_allclose(w, [0.5, 1.0], rtol=0, atol=1e-14)

    def test_matches_explicit_normal_equations(self):
        # oracle: dense inverse of the normal equations, nothing shared
        # with the solver path
        rng = np.random.default_rng(7)
        phi = rng.normal(size=(20, 3))
        y = rng.normal(size=20)
        lam = 1e-4
        oracle = np.linalg.inv(phi.T @ phi + lam * np.eye(3)) @ (phi.T @ y)
        w = ridge_solve(phi, y, lam)
        np.testing.assert_allclose(w, oracle, atol=1e-8)

    def test_residual_bound_random_systems(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            n = int(rng.integers(2, 40))
            r = int(rng.integers(1, 8))
            phi = rng.normal(size=(n, r))
            y = rng.normal(size=n)
            lam = float(rng.choice([1e-6, 1e-4, 1e-2, 1.0]))
            w = ridge_solve(phi, y, lam)
            resid = phi.T @ (phi @ w - y) + lam * w
            bound = 1e-8 * (1.0 + np.max(np.abs(phi.T @ y)))
            assert np.max(np.abs(resid)) < bound

    def test_positive_lambda_never_errors(self):
        # rank-deficient design: duplicate columns
        rng = np.random.default_rng(3)
        col = rng.normal(size=(10, 1))
        phi = np.hstack([col, col, col])
        y = rng.normal(size=10)
        w = ridge_solve(phi, y, 1e-4)
        assert np.all(np.isfinite(w))

    def test_singular_with_lambda_zero_raises(self):
        col = np.ones((5, 1))
        phi = np.hstack([col, col])
        with pytest.raises(SingularMatrixError):
            ridge_solve(phi, np.ones(5), 0.0)

    def test_dimension_mismatch_raises(self):
        with pytest.raises(ValueError):
            ridge_solve(np.eye(3), np.ones(4), 0.1)

    def test_negative_lambda_raises(self):
        with pytest.raises(ValueError):
            ridge_solve(np.eye(2), np.ones(2), -1.0)

    def test_nonfinite_input_raises(self):
        phi = np.eye(2)
        phi[0, 0] = np.nan
        with pytest.raises(ValueError):
            ridge_solve(phi, np.ones(2), 0.1)


class TestClip:
    def test_basic(self):
        np.testing.assert_array_equal(
            clip_elementwise([-2.0, 0.5, 3.0], -1.0, 1.0), [-1.0, 0.5, 1.0]
        )

    def test_identity_inside_bounds(self):
        v = np.array([-0.9, 0.0, 0.99])
        np.testing.assert_array_equal(clip_elementwise(v, -1.0, 1.0), v)

    def test_boundary_fixed_points(self):
        np.testing.assert_array_equal(clip_elementwise([-1.0, 1.0], -1.0, 1.0), [-1.0, 1.0])

    def test_bounds_out_of_order(self):
        with pytest.raises(ValueError):
            clip_elementwise([0.0], 1.0, -1.0)


class TestMeanCI95:
    def test_zero_variance(self):
        assert mean_ci95([5.0, 5.0, 5.0, 5.0]) == (5.0, 5.0, 5.0)

    def test_two_points_analytic(self):
        mean, lo, hi = mean_ci95([0.0, 1.0])
        # sd = sqrt(0.5); half-width = 1.96 * sd / sqrt(2) = 0.98
        assert mean == pytest.approx(0.5)
        assert lo == pytest.approx(-0.48)
        assert hi == pytest.approx(1.48)

    def test_matches_independent_reimplementation(self):
        samples = RandomStream(99).uniforms(100)
        mean, lo, hi = mean_ci95(samples)
        # second implementation, scalar arithmetic only
        n = len(samples)
        m = sum(samples) / n
        var = sum((s - m) ** 2 for s in samples) / (n - 1)
        half = 1.96 * math.sqrt(var) / math.sqrt(n)
        assert abs(mean - m) < 1e-10
        assert abs(lo - (m - half)) < 1e-10
        assert abs(hi - (m + half)) < 1e-10

    def test_single_sample_rejected(self):
        with pytest.raises(InsufficientDataError):
            mean_ci95([1.0])


class TestRandomStream:
    def test_equal_seeds_equal_draws(self):
        a = RandomStream(123456789).uniforms(10_000)
        b = RandomStream(123456789).uniforms(10_000)
        np.testing.assert_array_equal(a, b)

    def test_different_seeds_differ(self):
        a = RandomStream(1).uniforms(100)
        b = RandomStream(2).uniforms(100)
        assert not np.array_equal(a, b)

    def test_batched_equals_sequential(self):
        batch = RandomStream(42).uniforms(64)
        s = RandomStream(42)
        single = np.array([s.uniform() for _ in range(64)])
        np.testing.assert_array_equal(batch, single)

    def test_uniform_range(self):
        u = RandomStream(5).uniforms(10_000)
        assert np.all(u >= 0.0) and np.all(u < 1.0)
        assert 0.45 < u.mean() < 0.55

    def test_normals_moments(self):
        z = RandomStream(17).normals(20_000)
        assert abs(z.mean()) < 0.03
        assert abs(z.std() - 1.0) < 0.03

    def test_permutation_is_permutation(self):
        perm = RandomStream(8).permutation(1000)
        assert sorted(perm.tolist()) == list(range(1000))

    def test_permutation_deterministic(self):
        np.testing.assert_array_equal(
            RandomStream(8).permutation(50), RandomStream(8).permutation(50)
        )

    def test_split_streams_independent_and_deterministic(self):
        parent = RandomStream(3)
        a = parent.split(0).uniforms(10)
        b = parent.split(1).uniforms(10)
        assert not np.array_equal(a, b)
        np.testing.assert_array_equal(a, RandomStream(3).split(0).uniforms(10))
