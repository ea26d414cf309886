"""Unit tests for spectral curves, contours and the master operator."""

import math

import numpy as np
import pytest

from src.loggas.curve import (
    EdgeType,
    SpectralCurve,
    a_periods,
    holomorphic_basis,
    inverse_master_operator,
    master_operator,
    period_matrix,
)
from src.loggas.errors import CriticalityError, ParameterError

SOFT4 = (EdgeType.SOFT,) * 4
TWO_CUT = SpectralCurve((-math.sqrt(6), -math.sqrt(2), math.sqrt(2), math.sqrt(6)), SOFT4)
ONE_CUT = SpectralCurve((-2.0, 2.0), (EdgeType.SOFT, EdgeType.SOFT))


class TestStructure:
    def test_genus_and_cuts(self):
        assert TWO_CUT.genus == 1
        assert TWO_CUT.cut_index(2.0) == 1
        assert TWO_CUT.cut_index(0.0) is None
        assert TWO_CUT.signature(0) == "++"

    def test_sigma_behaves_like_power_at_infinity(self):
        """sigma ~ x^{g+1} with positive leading coefficient."""
        val = TWO_CUT.sigma(np.array([1e4]))[0]
        assert val.real / 1e8 == pytest.approx(1.0, rel=1e-6)

    def test_sigma_gap_sign(self):
        """sigma is negative on the real gap between the two cuts."""
        assert TWO_CUT.sigma_gap_sign(0.0) == -1
        assert TWO_CUT.sigma(np.array([0.0 + 0.0j]))[0].real < 0

    def test_odd_edge_count_rejected(self):
        with pytest.raises(ParameterError):
            SpectralCurve((0.0, 1.0, 2.0), (EdgeType.SOFT,) * 3)

    def test_coincident_edges_rejected(self):
        with pytest.raises(CriticalityError):
            SpectralCurve((0.0, 1.0, 1.0, 2.0), SOFT4)


class TestContours:
    def test_residue_inside_one_ellipse(self):
        """The contour integral of 1/(x - c_0) dx / 2 i pi picks the pole inside cut 0 only."""
        contour = TWO_CUT.ellipse(0.3, 128)
        c0 = TWO_CUT.center(0)
        assert contour.integrate(1.0 / (contour.nodes - c0)) == pytest.approx(1.0, abs=1e-12)

    def test_polynomials_integrate_to_zero(self):
        contour = TWO_CUT.ellipse(0.3, 128)
        assert abs(contour.integrate(contour.nodes ** 3)) < 1e-12

    def test_inside_and_min_eta(self):
        """A point on the 0.5-ellipse of cut 1 is inside the 0.6 one and outside the 0.4 one."""
        z = TWO_CUT.center(1) + TWO_CUT.half_length(1) * np.cosh(0.5 + 0.7j)
        assert TWO_CUT.min_eta(np.array([z])) == pytest.approx(0.5, abs=1e-12)
        assert TWO_CUT.inside(np.array([z]), 0.6)[0] == 1
        assert TWO_CUT.inside(np.array([z]), 0.4)[0] == -1

    def test_a_periods_of_constant_vanish(self):
        contour = TWO_CUT.ellipse(0.3, 64)
        assert a_periods(TWO_CUT, contour, np.ones(len(contour))) == pytest.approx([0.0], abs=1e-12)


class TestHolomorphicBasis:
    def test_normalization(self):
        """A_1-period of psi_1 / sigma equals one."""
        basis = holomorphic_basis(TWO_CUT)
        period = TWO_CUT.a_period_over_sigma(1, lambda t: basis.evaluate(t)[0])
        assert period == pytest.approx(1.0, abs=1e-12)

    def test_genus_zero_is_empty(self):
        assert holomorphic_basis(ONE_CUT).size == 0


class TestPeriodMatrix:
    def test_negative_hessian_gives_upper_half_plane(self):
        basis = holomorphic_basis(TWO_CUT)
        tau = period_matrix(TWO_CUT, basis, [[-2.0]])
        assert tau[0, 0] == pytest.approx(1j / math.pi)

    def test_positive_hessian_rejected(self):
        basis = holomorphic_basis(TWO_CUT)
        with pytest.raises(ParameterError):
            period_matrix(TWO_CUT, basis, [[1.0]])

    def test_shape_mismatch_rejected(self):
        basis = holomorphic_basis(TWO_CUT)
        with pytest.raises(ParameterError):
            period_matrix(TWO_CUT, basis, np.eye(2) * -1.0)


class TestMasterOperator:
    def test_inverse_recovers_known_solution(self):
        """With 2y = sigma on [-2, 2], phi = -1/sigma^2 is the image of f = sigma^{-3}."""
        inner = ONE_CUT.ellipse(0.4, 256)
        basis = holomorphic_basis(ONE_CUT)
        phi = -1.0 / ONE_CUT.sigma(inner.nodes) ** 2
        f = inverse_master_operator(ONE_CUT, basis, phi, [], ONE_CUT.sigma, inner, np.array([3.0, -2.5 + 1.0j]))
        expected = ONE_CUT.sigma(np.array([3.0, -2.5 + 1.0j])) ** -3
        assert np.max(np.abs(f - expected)) < 1e-10

    def test_forward_operator(self):
        assert master_operator([2.0], [3.0])[0] == pytest.approx(-6.0)

    def test_phi_shape_checked(self):
        inner = ONE_CUT.ellipse(0.4, 64)
        basis = holomorphic_basis(ONE_CUT)
        with pytest.raises(ParameterError):
            inverse_master_operator(ONE_CUT, basis, np.zeros(3), [], ONE_CUT.sigma, inner, np.array([3.0]))
