"""Tests for forward differences, moduli of smoothness and Steklov means."""

import numpy as np
import numpy.testing as nptest
import pytest

from hybridop.core.errors import DomainError, HTooLargeError
from hybridop.schemas.params import IntervalPair
from hybridop.services.smoothing import forward_difference, modulus_of_smoothness, steklov_mean, sup_norm
from hybridop.utils.function_suite import abs1, monomial, polynomial

MEAN_TOL: float = 1e-12
INNER_POINTS = np.linspace(0.6, 1.4, 9)


class TestForwardDifference:
    @pytest.mark.parametrize("h", [0.1, 0.25])
    def test_second_difference_of_square(self, h: float) -> None:
        assert forward_difference(monomial(2), 2, h, 0.7) == pytest.approx(2 * h * h, rel=1e-12)

    @pytest.mark.parametrize("h", [0.1, 0.25])
    def test_third_difference_of_cube(self, h: float) -> None:
        assert forward_difference(monomial(3), 3, h, 0.4) == pytest.approx(6 * h ** 3, rel=1e-10)

    def test_vectorized(self) -> None:
        xs = np.linspace(0.0, 1.0, 5)
        nptest.assert_allclose(forward_difference(monomial(1), 1, 0.3, xs), np.full(5, 0.3), rtol=1e-12)

    def test_order_validation(self) -> None:
        with pytest.raises(DomainError):
            forward_difference(monomial(1), 0, 0.1, 1.0)

    def test_rejects_negative_nodes(self) -> None:
        with pytest.raises(DomainError):
            forward_difference(monomial(1), 1, 0.1, -0.5)


class TestModulus:
    @pytest.mark.parametrize("h", [0.05, 0.1, 0.4])
    def test_linear(self, h: float) -> None:
        assert modulus_of_smoothness(monomial(1), 1, h, (0.0, 3.0)) == pytest.approx(h, rel=1e-12)

    @pytest.mark.parametrize("h", [0.05, 0.1, 0.4])
    def test_square(self, h: float) -> None:
        assert modulus_of_smoothness(monomial(2), 2, h, (0.0, 3.0)) == pytest.approx(2 * h * h, rel=1e-9)

    def test_kink_first_order(self) -> None:
        assert modulus_of_smoothness(abs1(), 1, 0.1, (0.0, 3.0)) == pytest.approx(0.1, rel=1e-12)

    def test_kink_second_order(self) -> None:
        assert modulus_of_smoothness(abs1(), 2, 0.1, (0.0, 3.0)) == pytest.approx(0.2, rel=1e-12)

    def test_monotone_in_h(self) -> None:
        values = [modulus_of_smoothness(abs1(), 2, h, (0.0, 3.0)) for h in (0.025, 0.05, 0.1, 0.2)]
        assert values == sorted(values)

    def test_coarse_grid_rejected(self) -> None:
        with pytest.raises(DomainError):
            modulus_of_smoothness(monomial(1), 1, 0.1, (0.0, 1.0), grid_points=10)

    @pytest.mark.parametrize("h", [0.0, -0.1])
    def test_nonpositive_h_rejected(self, h: float) -> None:
        with pytest.raises(DomainError):
            modulus_of_smoothness(monomial(1), 1, h, (0.0, 1.0))


def test_sup_norm_includes_endpoints() -> None:
    assert sup_norm(abs1(), (0.0, 3.0)) == pytest.approx(2.0)


class TestSteklovMean:
    @pytest.mark.parametrize("s", [1, 2, 3])
    def test_reproduces_affine(self, s: int, intervals: IntervalPair) -> None:
        f = polynomial([0.5, 2.0])
        mean = steklov_mean(f, 0.05, s, intervals)
        nptest.assert_allclose(mean(INNER_POINTS), 0.5 + 2.0 * INNER_POINTS, rtol=MEAN_TOL)
        nptest.assert_allclose(mean.derivative(1, INNER_POINTS), np.full(INNER_POINTS.size, 2.0), rtol=MEAN_TOL)

    def test_square_and_derivatives(self, intervals: IntervalPair) -> None:
        h = 0.1
        mean = steklov_mean(monomial(2), h, 2, intervals)
        nptest.assert_allclose(mean(INNER_POINTS), INNER_POINTS ** 2 - h * h / 3.0, rtol=MEAN_TOL)
        nptest.assert_allclose(mean.derivative(1, INNER_POINTS), 2.0 * INNER_POINTS, rtol=MEAN_TOL)
        nptest.assert_allclose(mean.derivative(2, INNER_POINTS), np.full(INNER_POINTS.size, 2.0), rtol=MEAN_TOL)

    def test_scalar_input(self, intervals: IntervalPair) -> None:
        mean = steklov_mean(monomial(2), 0.1, 1, intervals)
        value = mean(1.0)
        assert isinstance(value, float)
        assert value == pytest.approx(1.0 + 0.01 / 12.0, rel=MEAN_TOL)

    def test_reach_boundary_accepted(self, intervals: IntervalPair) -> None:
        mean = steklov_mean(monomial(2), 0.2, 2, intervals)
        assert np.isfinite(mean(0.6))

    def test_h_too_large(self, intervals: IntervalPair) -> None:
        with pytest.raises(HTooLargeError):
            steklov_mean(monomial(2), 0.25, 2, intervals)

    def test_derivative_order_above_s(self, intervals: IntervalPair) -> None:
        mean = steklov_mean(monomial(2), 0.05, 2, intervals)
        with pytest.raises(DomainError):
            mean.derivative(3, 1.0)

    def test_outside_inner_interval(self, intervals: IntervalPair) -> None:
        mean = steklov_mean(monomial(2), 0.05, 2, intervals)
        with pytest.raises(DomainError):
            mean(0.5)

    @pytest.mark.parametrize("s", [0, 4])
    def test_order_validation(self, s: int, intervals: IntervalPair) -> None:
        with pytest.raises(DomainError):
            steklov_mean(monomial(2), 0.01, s, intervals)
