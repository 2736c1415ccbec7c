"""Projection sampling, dataset projection, and the Monte-Carlo oracle."""

import math

import numpy as np
import pytest

from flipbound import (
    Angle,
    InvalidParameterError,
    ProjectionSpec,
    flip_exact,
    mc_flip_rate,
    project,
    sample_matrix,
)
from flipbound import projection as proj_mod

from oracles import pair_at_angle


class TestProjectionSpec:
    def test_rejects_zero_dimensions(self):
        with pytest.raises(InvalidParameterError):
            ProjectionSpec(k=0, d=5)
        with pytest.raises(InvalidParameterError):
            ProjectionSpec(k=5, d=0)

    def test_rejects_unknown_distribution(self):
        with pytest.raises(InvalidParameterError):
            ProjectionSpec(k=2, d=2, distribution="haar")

    def test_rejects_bad_sigma(self):
        with pytest.raises(InvalidParameterError):
            ProjectionSpec(k=2, d=2, sigma=0.0)


class TestSampleMatrix:
    def test_seed_determinism(self):
        spec = ProjectionSpec(k=6, d=11, seed=42)
        np.testing.assert_array_equal(sample_matrix(spec), sample_matrix(spec))

    def test_different_seeds_differ(self):
        a = sample_matrix(ProjectionSpec(k=6, d=11, seed=1))
        b = sample_matrix(ProjectionSpec(k=6, d=11, seed=2))
        assert not np.array_equal(a, b)

    def test_gaussian_mean_clt(self):
        R = sample_matrix(ProjectionSpec(k=100, d=50, sigma=1.0, seed=0))
        assert abs(R.mean()) <= 5.0 / math.sqrt(100 * 50)

    def test_gaussian_sigma_scales(self):
        base = sample_matrix(ProjectionSpec(k=20, d=20, sigma=1.0, seed=3))
        scaled = sample_matrix(ProjectionSpec(k=20, d=20, sigma=2.5, seed=3))
        np.testing.assert_allclose(scaled, 2.5 * base, rtol=1e-12)

    def test_rademacher_support(self):
        R = sample_matrix(ProjectionSpec(k=40, d=30, distribution="rademacher", seed=5))
        assert set(np.unique(R)) == {-1.0, 1.0}


class TestProject:
    def test_identity_override(self):
        X = np.random.default_rng(0).standard_normal((7, 4))
        y = np.array([1.0, -1.0, 1.0, 1.0, -1.0, -1.0, 1.0])
        spec = ProjectionSpec(k=4, d=4, seed=0)
        out = project(X, y, spec, matrix=np.eye(4))
        np.testing.assert_array_equal(out.points, X)
        np.testing.assert_array_equal(out.labels, y)

    def test_zero_vector_maps_to_zero(self):
        spec = ProjectionSpec(k=3, d=5, seed=1)
        out = project(np.zeros((2, 5)), np.array([1.0, -1.0]), spec)
        np.testing.assert_array_equal(out.points, np.zeros((2, 3)))

    def test_dimension_mismatch(self):
        spec = ProjectionSpec(k=3, d=5, seed=1)
        with pytest.raises(InvalidParameterError):
            project(np.zeros((2, 4)), np.array([1.0, -1.0]), spec)

    def test_norm_second_moment(self):
        # E ||Rx||^2 = k sigma^2 ||x||^2, checked over 10^4 matrix draws
        x = np.array([0.3, -1.2, 0.5, 2.0, -0.7, 0.1, 0.9, -0.4])
        k, sigma = 5, 1.0
        total = 0.0
        draws = 10_000
        for s in range(draws):
            R = sample_matrix(ProjectionSpec(k=k, d=8, sigma=sigma, seed=s))
            total += float(np.sum((R @ x) ** 2))
        ratio = total / draws / (k * sigma ** 2)
        assert ratio == pytest.approx(float(x @ x), rel=0.05)


class TestMcFlipRate:
    def test_zero_angle_never_flips(self):
        h = np.array([0.3, -0.7, 1.1, 0.2])
        rate, _ = mc_flip_rate(h, h, ProjectionSpec(k=4, d=4, seed=0), 100_000)
        assert rate <= 1e-4

    def test_right_angle_half(self):
        h, u = pair_at_angle(math.pi / 2, 5)
        rate, se = mc_flip_rate(h, u, ProjectionSpec(k=5, d=5, seed=1), 200_000)
        assert abs(rate - 0.5) <= 4 * se

    def test_k1_third(self):
        h, u = pair_at_angle(math.pi / 3, 4)
        rate, se = mc_flip_rate(h, u, ProjectionSpec(k=1, d=4, seed=2), 200_000)
        assert abs(rate - 1 / 3) <= 4 * se

    def test_matches_exact_generic(self):
        theta = 1.1
        h, u = pair_at_angle(theta, 6)
        rate, se = mc_flip_rate(h, u, ProjectionSpec(k=7, d=6, seed=3), 200_000)
        assert abs(rate - flip_exact(7, Angle.from_theta(theta))) <= 4 * se

    def test_rejects_zero_vectors(self):
        with pytest.raises(InvalidParameterError):
            mc_flip_rate(np.zeros(3), np.ones(3), ProjectionSpec(k=2, d=3), 10)

    def test_rejects_dimension_mismatch(self):
        with pytest.raises(InvalidParameterError):
            mc_flip_rate(np.ones(3), np.ones(3), ProjectionSpec(k=2, d=4), 10)

    def test_seed_determinism(self):
        h, u = pair_at_angle(0.8, 5)
        spec = ProjectionSpec(k=3, d=5, seed=11)
        assert mc_flip_rate(h, u, spec, 50_000) == mc_flip_rate(h, u, spec, 50_000)

    def test_chunking_invariance(self, monkeypatch):
        # per-trial counter blocks: the estimate must not depend on
        # how trials are batched
        h, u = pair_at_angle(0.9, 4)
        spec = ProjectionSpec(k=3, d=4, seed=23)
        reference = mc_flip_rate(h, u, spec, 10_000)
        monkeypatch.setattr(proj_mod, "_CHUNK_ELEMS", 997)
        chunked = mc_flip_rate(h, u, spec, 10_000)
        assert chunked == reference

    def test_prefix_consistency(self):
        # first T trials of a longer run equal a T-trial run exactly
        h, u = pair_at_angle(0.9, 4)
        spec = ProjectionSpec(k=2, d=4, seed=29)
        r_small, _ = mc_flip_rate(h, u, spec, 4_096)
        r_big, _ = mc_flip_rate(h, u, spec, 8_192)
        # rates are consistent binomial prefixes: counts must differ by
        # at most the extra trials
        flips_small = round(r_small * 4_096)
        flips_big = round(r_big * 8_192)
        assert 0 <= flips_big - flips_small <= 4_096

    def test_dimension_free(self):
        theta = 1.0
        h1, u1 = pair_at_angle(theta, 10)
        h2, u2 = pair_at_angle(theta, 60)
        r1, s1 = mc_flip_rate(h1, u1, ProjectionSpec(k=4, d=10, seed=4), 100_000)
        r2, s2 = mc_flip_rate(h2, u2, ProjectionSpec(k=4, d=60, seed=5), 100_000)
        assert abs(r1 - r2) <= 4 * math.hypot(s1, s2)

    def test_rademacher_obeys_subgaussian_bound(self):
        for k, theta, seed in [(6, 0.9, 6), (12, 1.1, 7), (3, 0.5, 8)]:
            h, u = pair_at_angle(theta, 7)
            spec = ProjectionSpec(k=k, d=7, distribution="rademacher", seed=seed)
            rate, se = mc_flip_rate(h, u, spec, 100_000)
            assert rate <= math.exp(-k * math.cos(theta) ** 2 / 8.0) + 4 * se

    def test_scale_invariance_of_pair(self):
        h, u = pair_at_angle(1.3, 5)
        spec = ProjectionSpec(k=4, d=5, seed=10)
        assert mc_flip_rate(h, u, spec, 20_000) == mc_flip_rate(3.0 * h, 0.5 * u, spec, 20_000)
