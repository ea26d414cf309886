"""Unit tests for the loop-equation recursion on Gaussian closed forms."""

import math

import numpy as np
import pytest

from src.loggas.curve import build_curve, holomorphic_basis
from src.loggas.equilibrium import solve_fixed_filling
from src.loggas.errors import ParameterError
from src.loggas.harness.suites import QUARTIC, QUARTIC_DOMAIN
from src.loggas.potential import AnalyticPotential, Domain
from src.loggas.recursion import (
    UniversalTwoPoint,
    build_engine,
    constituents,
    is_zero,
    required_levels,
    w1_order0,
    w2_order0,
    wn_coeff,
)
from src.loggas.selberg import ReferenceModel

GAUSSIAN = AnalyticPotential.polynomial([0.0, 0.0, 0.5])


@pytest.fixture(scope="module")
def gaussian():
    m = solve_fixed_filling(GAUSSIAN, Domain.from_pairs([[-8.0, 8.0]]), [1.0])
    curve = build_curve(m)
    return m, curve, holomorphic_basis(curve)


@pytest.fixture(scope="module")
def two_cut():
    m = solve_fixed_filling(QUARTIC, QUARTIC_DOMAIN, [0.5, 0.5])
    curve = build_curve(m)
    return m, curve, holomorphic_basis(curve)


class TestBookkeeping:
    """Which coefficients exist and how deep their recursion goes."""

    def test_vanishing_orders(self):
        assert is_zero(3, 0)
        assert not is_zero(3, 1)
        assert not is_zero(1, -1)

    def test_constituents_of_w1_order0(self):
        """W_1^0 needs W_1^{-1} and W_2^{-1} (zero) among its inputs."""
        deps = constituents(1, 0)
        assert (1, -1) in deps
        assert (2, -1) not in deps

    def test_levels_needed(self):
        """Only W_1^{-1} is read off the leading order; W_2^0 takes one K^{-1}."""
        assert required_levels(1, -1) == 0
        assert required_levels(2, 0) == 1
        assert required_levels(1, 1) > required_levels(1, 0)


class TestGaussianCorrelators:
    """beta = 2 Gaussian: closed forms for W_1^{-1}, W_1^0, W_2^0 and W_1^1."""

    def test_leading_one_point(self, gaussian):
        m, curve, basis = gaussian
        engine = build_engine(m, curve, basis, 2.0, [(1, 0)])
        val = engine.evaluate(1, -1, np.array([[3.0]]))[0]
        assert val == pytest.approx((3.0 - math.sqrt(5.0)) / 2.0, abs=1e-10)

    def test_one_point_order_zero_vanishes_at_beta_two(self, gaussian):
        w10 = w1_order0(*gaussian, 2.0)
        assert abs(w10(np.array([3.0, -2.5, 0.5 + 2.0j]))).max() < 1e-9

    def test_two_point_universal_form(self, gaussian):
        """W_2^0(3, -3) = +1/45."""
        w20 = w2_order0(*gaussian, 2.0)
        assert complex(w20(3.0, -3.0)) == pytest.approx(1.0 / 45.0, abs=1e-10)

    @pytest.mark.parametrize("beta", [1.0, 2.0, 4.0])
    def test_two_point_matches_closed_forms(self, gaussian, beta):
        """K^{-1} of the n = 2 source agrees with the universal one-cut formula."""
        w20 = w2_order0(*gaussian, beta)
        closed = UniversalTwoPoint(gaussian[1], gaussian[2], beta)
        reference = ReferenceModel("++", -2.0, 2.0)
        x1 = np.array([3.0, -3.0, 2.5 + 1.0j, 0.3 + 2.5j, -4.0 - 0.5j])
        x2 = np.array([-3.0, 4.5, 0.1 - 2.4j, -2.8 + 0.2j, 3.3 + 0.7j])
        got = w20(x1, x2)
        np.testing.assert_allclose(got, closed.value(x1, x2), atol=1e-9)
        np.testing.assert_allclose(got, reference.w2_order0(x1, x2, beta), atol=1e-9)

    def test_two_point_is_symmetric(self, gaussian):
        w20 = w2_order0(*gaussian, 2.0)
        a, b = 2.7 + 0.4j, -3.1 + 0.2j
        assert complex(w20(a, b)) == pytest.approx(complex(w20(b, a)), abs=1e-10)

    def test_genus_one_correction(self, gaussian):
        """W_1^1(x) = (x^2 - 4)^{-5/2}: <tr M^4> = 2N + 1/N."""
        w11 = wn_coeff(*gaussian, 1, 1, 2.0)
        assert complex(w11(3.0)).real == pytest.approx(5.0 ** -2.5, rel=1e-7)

    def test_loop_equation_residual(self, gaussian):
        """K W_1^1 - phi_1^1 is analytic near the cut on the top contour level."""
        engine = build_engine(*gaussian, 2.0, [(1, 1)])
        assert engine.loop_residual(1, 1, [], [3.0, 4.0 + 1.0j]) < 1e-7

    def test_beta_one_order_zero(self, gaussian):
        """At beta = 1, W_1^0 = -(1 - 2/beta) K^{-1}[W'] is nonzero with vanishing 1/x term."""
        w10 = w1_order0(*gaussian, 1.0)
        far = np.array([40.0])
        assert abs(w10(far)[0]) * 40.0 < 1e-2
        assert abs(w10(np.array([3.0]))[0]) > 1e-4

    def test_wrong_arity(self, gaussian):
        w20 = w2_order0(*gaussian, 2.0)
        with pytest.raises(ParameterError):
            w20(3.0)


def test_nonpositive_beta_rejected(gaussian):
    m, curve, basis = gaussian
    with pytest.raises(ParameterError):
        build_engine(m, curve, basis, 0.0, [(1, 0)])


class TestTwoCutTwoPoint:
    """Genus one: W_2^0 carries the holomorphic-form correction fixing its A-periods."""

    def test_recursion_matches_closed_form(self, two_cut):
        w20 = w2_order0(*two_cut, 2.0)
        closed = UniversalTwoPoint(two_cut[1], two_cut[2], 2.0)
        x1 = np.array([3.5, 1.9 + 1.0j, -1.9 + 0.8j, 0.3 + 0.5j, -3.2 - 0.4j])
        x2 = np.array([-3.5, 0.2 - 0.9j, 3.1 + 0.3j, -1.5 + 1.1j, 2.0 - 1.3j])
        np.testing.assert_allclose(w20(x1, x2), closed.value(x1, x2), atol=1e-8)

    def test_vanishing_a_periods(self, two_cut):
        w20 = w2_order0(*two_cut, 2.0)
        assert np.abs(w20.a_periods([3.5 + 0.5j])).max() < 1e-8
