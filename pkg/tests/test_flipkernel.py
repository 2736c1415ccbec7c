"""Flip-probability kernel: exact values, bounds, loss, derivative."""

import math

import numpy as np
import pytest

from flipbound import (
    Angle,
    FlipEval,
    FlipMethod,
    InvalidParameterError,
    flip_chernoff,
    flip_exact,
    flip_probability,
    lipschitz_constant,
    loss,
    loss_derivative,
)

from oracles import flip_by_quadrature


class TestAngle:
    def test_cosine_authoritative(self):
        a = Angle.from_theta(math.pi / 3)
        assert a.cosine == pytest.approx(0.5, abs=1e-15)
        assert a.theta == pytest.approx(math.pi / 3, abs=1e-15)

    def test_clamps_rounding_noise(self):
        assert Angle.from_cosine(1.0 + 5e-13).cosine == 1.0
        assert Angle.from_cosine(-1.0 - 5e-13).cosine == -1.0

    def test_rejects_out_of_range(self):
        with pytest.raises(InvalidParameterError):
            Angle.from_cosine(1.001)
        with pytest.raises(InvalidParameterError):
            Angle.from_theta(-0.1)

    def test_between_vectors(self):
        a = Angle.between([1.0, 0.0], [0.0, 2.0])
        assert a.cosine == 0.0
        with pytest.raises(InvalidParameterError):
            Angle.between([0.0, 0.0], [1.0, 0.0])


class TestFlipExact:
    def test_right_angle_is_half(self):
        assert flip_exact(7, Angle.from_theta(math.pi / 2)) == pytest.approx(0.5, abs=1e-10)

    def test_k1_closed_form(self):
        assert flip_exact(1, Angle.from_theta(math.pi / 3)) == pytest.approx(1 / 3, abs=1e-12)

    def test_k2_closed_form(self):
        assert flip_exact(2, Angle.from_theta(math.pi / 3)) == pytest.approx(0.25, abs=1e-12)

    def test_zero_angle_never_flips(self):
        assert flip_exact(10, Angle.from_theta(0.0)) == 0.0

    def test_complement_symmetry(self):
        lo = flip_exact(5, Angle.from_theta(math.pi / 3))
        hi = flip_exact(5, Angle.from_theta(2 * math.pi / 3))
        assert hi == pytest.approx(1.0 - lo, abs=1e-12)

    def test_endpoints_exact(self):
        for k in (1, 2, 17, 300):
            assert flip_exact(k, Angle.from_cosine(1.0)) == 0.0
            assert flip_exact(k, Angle.from_cosine(-1.0)) == 1.0

    def test_invalid_k(self):
        with pytest.raises(InvalidParameterError):
            flip_exact(0, Angle.from_theta(1.0))
        with pytest.raises(InvalidParameterError):
            flip_probability(1.5, 0.3)


class TestClosedFormGrids:
    thetas = np.linspace(0.0, math.pi, 1000)

    def test_k1_equals_theta_over_pi(self):
        values = flip_probability(1, np.cos(self.thetas))
        np.testing.assert_allclose(values, self.thetas / math.pi, atol=1e-9)

    def test_k2_equals_half_one_minus_cos(self):
        cos = np.cos(self.thetas)
        values = flip_probability(2, cos)
        np.testing.assert_allclose(values, 0.5 * (1.0 - cos), atol=1e-9)


class TestStructuralProperties:
    def test_boundary_values_all_k(self):
        for k in (1, 2, 3, 10, 100, 300):
            assert flip_exact(k, Angle.from_theta(0.0)) == pytest.approx(0.0, abs=1e-10)
            assert flip_exact(k, Angle.from_theta(math.pi)) == pytest.approx(1.0, abs=1e-10)
            assert flip_exact(k, Angle.from_theta(math.pi / 2)) == pytest.approx(0.5, abs=1e-10)

    def test_monotone_in_theta(self):
        thetas = np.linspace(0.0, math.pi, 1000)
        for k in (1, 2, 5, 20, 100):
            values = flip_probability(k, np.cos(thetas))
            assert np.all(np.diff(values) >= -1e-14)

    def test_complement_symmetry_grid(self):
        thetas = np.linspace(0.0, math.pi, 500)
        for k in (1, 3, 8, 50):
            fwd = flip_probability(k, np.cos(thetas))
            bwd = flip_probability(k, np.cos(math.pi - thetas))
            np.testing.assert_allclose(bwd, 1.0 - fwd, atol=1e-9)

    def test_loss_non_increasing_in_k(self):
        cos = np.linspace(-0.999, 0.999, 301)
        previous = loss(1, cos)
        for k in (2, 3, 5, 8, 20, 64, 200):
            current = loss(k, cos)
            assert np.all(current <= previous + 1e-12)
            previous = current

    def test_matches_quadrature(self):
        for k in (3, 5, 10, 50):
            for theta in (0.3, 1.0, math.pi / 2, 2.2, 2.9):
                expected = flip_by_quadrature(k, theta)
                got = flip_exact(k, Angle.from_theta(theta))
                assert got == pytest.approx(expected, abs=1e-10)


class TestChernoff:
    def test_gaussian_value(self):
        got = flip_chernoff(10, Angle.from_cosine(0.5), "gaussian")
        assert got == pytest.approx(math.exp(-1.25), abs=1e-12)
        assert got == pytest.approx(0.286505, abs=1e-6)

    def test_subgaussian_value(self):
        got = flip_chernoff(10, Angle.from_cosine(0.5), "subgaussian")
        assert got == pytest.approx(math.exp(-0.3125), abs=1e-12)
        assert got == pytest.approx(0.731616, abs=1e-6)

    def test_aligned_limit(self):
        for k in (1, 4, 9):
            assert flip_chernoff(k, Angle.from_cosine(1.0), "gaussian") == pytest.approx(
                math.exp(-k / 2.0), abs=1e-12
            )

    def test_requires_nonzero_cosine(self):
        with pytest.raises(InvalidParameterError):
            flip_chernoff(5, Angle.from_cosine(0.0), "gaussian")

    def test_unknown_family(self):
        with pytest.raises(InvalidParameterError):
            flip_chernoff(5, Angle.from_cosine(0.5), "laplace")

    def test_dominates_exact_on_positive_cosines(self):
        cos = np.linspace(0.01, 0.999, 200)
        for k in (1, 2, 5, 10, 40):
            exact = flip_probability(k, cos)
            gauss = np.exp(-k * cos ** 2 / 2.0)
            sub = np.exp(-k * cos ** 2 / 8.0)
            assert np.all(exact <= gauss + 1e-12)
            assert np.all(gauss <= sub + 1e-12)


class TestLoss:
    def test_zero_cosine(self):
        assert loss(4, 0.0) == 1.0

    def test_k2_value(self):
        assert loss(2, 0.4) == pytest.approx(0.6, abs=1e-12)

    def test_k1_value(self):
        assert loss(1, math.cos(math.pi / 4)) == pytest.approx(0.5, abs=1e-12)

    def test_one_on_nonpositive_cosines(self):
        cos = np.linspace(-1.0, 0.0, 50)
        np.testing.assert_array_equal(loss(9, cos), np.ones(50))


class TestLossDerivative:
    def test_k2_slope(self):
        assert loss_derivative(2, 0.3) == pytest.approx(-1.0, abs=1e-12)

    def test_flat_region(self):
        assert loss_derivative(2, -0.3) == 0.0

    def test_kink_uses_descending_side(self):
        assert loss_derivative(4, 0.0) == pytest.approx(loss_derivative(4, 1e-12), abs=1e-9)
        assert loss_derivative(4, 0.0) < 0.0

    def test_finite_difference_agreement(self):
        h = 1e-6
        for k, a in [(6, 0.5), (3, 0.2), (10, 0.7), (40, 0.3)]:
            fd = (loss(k, a + h) - loss(k, a - h)) / (2 * h)
            assert loss_derivative(k, a) == pytest.approx(fd, rel=1e-5)

    def test_k1_unsupported(self):
        with pytest.raises(InvalidParameterError):
            loss_derivative(1, 0.5)

    def test_rejects_endpoints(self):
        with pytest.raises(InvalidParameterError):
            loss_derivative(5, 1.0)

    def test_large_k_stays_finite(self):
        value = loss_derivative(500, 0.1)
        assert math.isfinite(value) and value < 0.0


class TestLipschitz:
    def test_k2_value(self):
        assert lipschitz_constant(2) == pytest.approx(1.0, abs=1e-12)

    def test_wendel_bound_and_monotone(self):
        previous = 0.0
        for k in range(2, 101):
            L = lipschitz_constant(k)
            assert L <= math.sqrt(2 * k / math.pi) + 1e-12
            assert L > previous
            previous = L
        assert lipschitz_constant(50) <= math.sqrt(100 / math.pi)

    def test_bounds_derivative(self):
        rng = np.random.default_rng(7)
        for k in (2, 3, 10, 60, 100):
            L = lipschitz_constant(k)
            a = rng.uniform(-0.999, 0.999, size=200)
            a = a[np.abs(a) > 1e-6]
            deriv = loss_derivative(k, a)
            assert np.all(np.abs(deriv) <= L + 1e-12)

    def test_requires_k_at_least_2(self):
        with pytest.raises(InvalidParameterError):
            lipschitz_constant(1)


class TestFlipEval:
    def test_roundtrip_dict(self):
        ev = FlipEval(5, 0.25, FlipMethod.EXACT)
        assert ev.to_dict() == {"k": 5, "value": 0.25, "method": "exact"}

    def test_mc_stderr_included(self):
        ev = FlipEval(5, 0.25, FlipMethod.MONTE_CARLO, mc_stderr=0.001)
        assert ev.to_dict()["mc_stderr"] == 0.001

    def test_validates_probability(self):
        with pytest.raises(InvalidParameterError):
            FlipEval(5, 1.5, FlipMethod.EXACT)

    def test_exact_below_gaussian_chernoff(self):
        # spot the advertised invariant on the eval pair
        for k, cos in [(3, 0.4), (12, 0.2), (25, 0.8)]:
            exact = flip_exact(k, Angle.from_cosine(cos))
            bound = flip_chernoff(k, Angle.from_cosine(cos), "gaussian")
            assert exact <= bound
