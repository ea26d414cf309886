"""Unit tests for fixed-filling free energies and their filling derivatives."""

import math

import numpy as np
import pytest

from src.loggas.config import ExpansionConfig
from src.loggas.errors import ParameterError
from src.loggas.freeenergy import FreeEnergySeries, eps_derivative_tensors, f_coeffs, free_energy_series
from src.loggas.potential import AnalyticPotential, Domain
from src.loggas.selberg import selberg_asymptotic

GAUSSIAN = AnalyticPotential.polynomial([0.0, 0.0, 0.5])
WIDE = Domain.from_pairs([[-8.0, 8.0]])


def make_series(eps, coefficients, gradient=(), genus=None):
    eps = np.asarray(eps, dtype=float)
    return FreeEnergySeries(
        eps=eps,
        beta=2.0,
        genus=eps.size - 1 if genus is None else genus,
        coefficients=dict(coefficients),
        nlogn=1.0,
        log_exponent=0.0,
        energy_route=coefficients.get(-2, 0.0),
        interpolation_route=coefficients.get(-2, 0.0),
        reference={},
        gradient=np.asarray(gradient, dtype=float),
        s_nodes=16,
    )


class TestMultinomial:
    """log N!/prod (N eps_h)! as a series in 1/N."""

    def test_matches_log_gamma(self):
        """Two equal fillings: the series plus -g/2 log N reproduces log binomial(N, N/2)."""
        series = make_series([0.5, 0.5], {-2: 0.0, -1: 0.0, 0: 0.0, 1: 0.0, 2: 0.0})
        terms = series.multinomial_terms()
        n = 1000.0
        predicted = sum(v * n ** (-k) for k, v in terms.items()) - 0.5 * math.log(n)
        exact = math.lgamma(n + 1) - 2 * math.lgamma(n / 2 + 1)
        assert predicted == pytest.approx(exact, abs=1e-9)

    def test_genus_zero_has_no_multinomial(self):
        series = make_series([1.0], {-2: -0.75, -1: 0.1, 0: 0.2})
        assert series.with_multinomial() == series.coefficients


class TestDerivativeTensors:
    """Nested central differences over a synthetic builder."""

    @staticmethod
    def builder(eps):
        e1 = float(eps[1])
        return make_series(eps, {-2: -e1 ** 3 / 3.0, -1: e1 ** 3, 0: 2.0 * e1}, gradient=[-e1 ** 2])

    def test_first_and_second_derivatives(self):
        tensors = eps_derivative_tensors(self.builder, [0.7, 0.3], {-2: 2, -1: 2, 0: 1}, multinomial=False)
        assert tensors[-2].derivatives[1] == pytest.approx([-0.09])
        assert tensors[-2].derivatives[2] == pytest.approx([[-0.6]])
        assert tensors[-1].value == pytest.approx(0.027)
        assert tensors[-1].derivatives[1] == pytest.approx([0.27], abs=1e-5)
        assert tensors[-1].derivatives[2] == pytest.approx([[1.8]], abs=1e-8)
        assert tensors[0].derivatives[1] == pytest.approx([2.0], abs=1e-9)

    def test_stencil_outside_simplex(self):
        with pytest.raises(ParameterError):
            eps_derivative_tensors(self.builder, [0.001, 0.999], {-1: 1}, multinomial=False)


def test_negative_order_rejected():
    with pytest.raises(ParameterError):
        free_energy_series(GAUSSIAN, WIDE, [1.0], -1)


@pytest.mark.slow
class TestGaussianSeries:
    """The Gaussian potential is its own reference model, so the series is the Selberg asymptotics."""

    @pytest.fixture(scope="class")
    def series(self):
        return free_energy_series(GAUSSIAN, WIDE, [1.0], 1, 2.0, ExpansionConfig(k_max=1))

    def test_leading_routes_agree(self, series):
        assert series.energy_route == pytest.approx(-0.75, abs=1e-8)
        assert series.interpolation_route == pytest.approx(-0.75, abs=1e-6)

    def test_coefficients_match_selberg(self, series):
        asym = selberg_asymptotic("++", 2.0)
        assert series.coefficients[-1] == pytest.approx(asym.n1, abs=1e-6)
        assert series.coefficients[0] == pytest.approx(asym.const, abs=1e-6)
        assert series.coefficients[1] == pytest.approx(asym.inverse[0], abs=1e-6)
        assert series.nlogn == pytest.approx(1.0)
        assert series.log_exponent == pytest.approx(5.0 / 12.0)

    def test_normalized_odd_orders_vanish(self, series):
        norm = series.normalized()
        assert norm[-1] == pytest.approx(0.0, abs=1e-6)
        assert norm[1] == pytest.approx(0.0, abs=1e-6)

    def test_report_is_serializable(self, series):
        out = series.to_dict()
        assert set(out["coefficients"]) == {"-2", "-1", "0", "1"}
        assert out["NlogN"] == 1.0


@pytest.mark.slow
def test_one_cut_quartic_normalized_odd_orders_vanish():
    """Away from the reference model the interpolation still gives beta = 2 odd-order cancellation."""
    p = AnalyticPotential.polynomial([0.0, 0.0, 0.5, 0.0, 0.05])
    tensors = f_coeffs(p, WIDE, [1.0], 1, 2.0, ExpansionConfig(k_max=1))
    assert [t.k for t in tensors] == [-2, -1, 0, 1]
    series = free_energy_series(p, WIDE, [1.0], 1, 2.0, ExpansionConfig(k_max=1))
    norm = series.normalized()
    assert norm[-1] == pytest.approx(0.0, abs=1e-5)
    assert norm[1] == pytest.approx(0.0, abs=1e-5)
