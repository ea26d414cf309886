"""Unit tests for Siegel theta functions and the correction operators."""

import math

import numpy as np
import pytest

from src.loggas.errors import DependencyError, ParameterError
from src.loggas.freeenergy import FreeEnergyTensor
from src.loggas.theta import (
    ThetaParams,
    apply_T_operator,
    correction_polynomials,
    lattice_size,
    quasi_period_factor,
    reduce_characteristic,
    tau_derivative,
    theta,
    theta_grad,
)

TAU2 = np.array([[1.1j, 0.2 + 0.3j], [0.2 + 0.3j, 0.1 + 0.9j]])


@pytest.fixture
def params():
    return ThetaParams.build(TAU2, [0.1 + 0.05j, -0.2 + 0.1j], [0.25, 0.5], [0.1, 0.3])


def test_jacobi_theta3_at_i():
    """theta_3(0 | i) = pi^{1/4} / Gamma(3/4)."""
    val = theta(ThetaParams.build([[1j]]))
    assert val.real == pytest.approx(math.pi ** 0.25 / math.gamma(0.75), abs=1e-14)
    assert val.imag == pytest.approx(0.0, abs=1e-14)


def test_quasi_periodicity(params):
    """theta(v + m + tau n) = factor * theta(v)."""
    m0, n0 = [1, 0], [0, 1]
    shifted = params.replace(v=params.v + np.asarray(m0) + TAU2 @ np.asarray(n0))
    expected = quasi_period_factor(params, m0, n0) * theta(params)
    assert abs(theta(shifted) - expected) <= 1e-10 * abs(expected)


def test_integer_shift_of_mu(params):
    """mu is only defined modulo Z^g."""
    moved = params.replace(mu=params.mu + np.array([1.0, -2.0]))
    assert abs(theta(moved) - theta(params)) <= 1e-12 * abs(theta(params))


def test_reduce_characteristic():
    assert reduce_characteristic([-0.25, 1.5, 2.0]).tolist() == [0.75, 0.5, 0.0]


@pytest.mark.parametrize("h,h2", [(0, 0), (1, 1), (0, 1)])
def test_heat_equation(params, h, h2):
    """d theta / d tau_{hh} = d^2 theta / dv_h^2 / (4 i pi); off-diagonal with 2 i pi."""
    hess = theta_grad(params, 2)[2]
    factor = 4j * math.pi if h == h2 else 2j * math.pi
    resid = abs(tau_derivative(params, h, h2) - hess[h, h2] / factor)
    assert resid <= 1e-6 * abs(theta(params))


def test_gradient_matches_finite_difference(params):
    """Term-wise gradient agrees with a central difference in v."""
    grad = theta_grad(params, 1)[1]
    step = 1e-6
    for h in range(2):
        e = np.zeros(2)
        e[h] = step
        fd = (theta(params.replace(v=params.v + e)) - theta(params.replace(v=params.v - e))) / (2 * step)
        assert abs(grad[h] - fd) <= 1e-6 * abs(grad[h])


def test_truncation_is_converged(params):
    """Tightening the tolerance does not move the value."""
    assert abs(theta(params, tol=1e-28) - theta(params)) <= 1e-12 * abs(theta(params))
    assert lattice_size(params, tol=1e-28) > lattice_size(params)


class TestValidation:
    """Inputs that ThetaParams refuses."""

    def test_im_tau_not_positive(self):
        with pytest.raises(ParameterError):
            ThetaParams.build([[1.0 - 0.5j]])

    def test_tau_not_symmetric(self):
        with pytest.raises(ParameterError):
            ThetaParams.build([[1j, 0.1], [0.2, 1j]])

    def test_v_wrong_length(self):
        with pytest.raises(ParameterError):
            ThetaParams.build(TAU2, v=[0.0])


class TestCorrections:
    """T^k polynomials assembled from free-energy derivative tensors."""

    def test_order_zero_is_theta(self, params):
        """T^0 = 1, so the operator returns theta itself."""
        block = apply_T_operator([], params, 0)
        assert abs(block[0] - theta(params)) <= 1e-12 * abs(theta(params))

    def test_first_order_polynomial(self):
        """T^1[X] = (F^-2)'''.X^3/6 + (F^-1)''.X^2/2 + (F^0)'.X in genus one."""
        tensors = [
            FreeEnergyTensor(-2, 0.0, {3: np.array([[[6.0]]])}),
            FreeEnergyTensor(-1, 0.0, {2: np.array([[2.0]])}),
            FreeEnergyTensor(0, 0.0, {1: np.array([3.0])}),
        ]
        pts = np.array([[2.0]])
        polys = correction_polynomials(tensors, pts, 1)
        assert polys[1][0] == pytest.approx(8.0 + 4.0 + 6.0)

    def test_missing_tensor(self):
        """A derivative the order needs but nobody supplied is a DependencyError."""
        tensors = [FreeEnergyTensor(-2, 0.0, {3: np.array([[[1.0]]])})]
        with pytest.raises(DependencyError) as exc_info:
            correction_polynomials(tensors, np.array([[1.0]]), 1)
        assert exc_info.value.missing == (0, 1)
