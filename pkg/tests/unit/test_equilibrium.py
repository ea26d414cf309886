"""Unit tests for the equilibrium measure solver."""

import csv
import math

import numpy as np
import pytest

from src.loggas.curve import EdgeType, edge_partition
from src.loggas.equilibrium import (
    density_csv,
    free_energy_gradient,
    offcritical_margin,
    solve_fixed_filling,
    solve_optimal,
)
from src.loggas.errors import DomainError, ParameterError
from src.loggas.potential import AnalyticPotential, Domain

GAUSSIAN = AnalyticPotential.polynomial([0.0, 0.0, 0.5])
QUARTIC = AnalyticPotential.polynomial([0.0, 0.0, -2.0, 0.0, 0.25])
QUARTIC_DOMAIN = Domain.from_pairs([[-4.0, -0.05], [0.05, 4.0]])


@pytest.fixture(scope="module")
def semicircle():
    return solve_fixed_filling(GAUSSIAN, Domain.from_pairs([[-8.0, 8.0]]), [1.0])


class TestSemicircle:
    """V = x^2/2: semicircle law on [-2, 2]."""

    def test_edges_are_soft_at_plus_minus_two(self, semicircle):
        assert semicircle.edges == pytest.approx([-2.0, 2.0], abs=1e-8)
        assert semicircle.types == [EdgeType.SOFT, EdgeType.SOFT]
        assert semicircle.genus == 0

    def test_density(self, semicircle):
        xs = np.array([-1.5, 0.0, 0.7, 1.9])
        exact = np.sqrt(4.0 - xs ** 2) / (2 * math.pi)
        assert semicircle.density(xs) == pytest.approx(exact, abs=1e-8)

    def test_moments_are_catalan(self, semicircle):
        """Second and fourth moments 1 and 2; odd moments vanish."""
        assert semicircle.moment(0) == pytest.approx(1.0, abs=1e-10)
        assert semicircle.moment(1) == pytest.approx(0.0, abs=1e-10)
        assert semicircle.moment(2) == pytest.approx(1.0, abs=1e-10)
        assert semicircle.moment(4) == pytest.approx(2.0, abs=1e-10)

    def test_stieltjes_transform(self, semicircle):
        """W(x) = (x - sqrt(x^2 - 4)) / 2 off the cut."""
        assert semicircle.stieltjes(np.array([3.0]))[0] == pytest.approx((3.0 - math.sqrt(5.0)) / 2.0, abs=1e-10)

    def test_energy(self, semicircle):
        """E = 3/4, the N^2 coefficient of -log Z_GUE."""
        assert semicircle.energy() == pytest.approx(0.75, abs=1e-8)

    def test_offcritical_margin_positive(self, semicircle):
        margin = offcritical_margin(semicircle)
        assert margin > 1e-3
        assert margin == semicircle.offcritical_margin()

    def test_effective_potential_positive_off_cut(self, semicircle):
        assert semicircle.effective_potential(0.0) == pytest.approx(0.0, abs=1e-8)
        assert semicircle.effective_potential(3.0) > 0.0

    def test_density_outside_cut_rejected(self, semicircle):
        with pytest.raises(DomainError):
            semicircle.density([3.0])

    def test_density_csv(self, semicircle, tmp_path):
        """CSV has an x,density header and points_per_cut rows."""
        path = density_csv(semicircle, tmp_path / "density.csv", points_per_cut=20)
        with open(path) as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["x", "density"]
        assert len(rows) == 21
        assert all(float(r[1]) > 0 for r in rows[1:])


def test_marchenko_pastur_hard_edge():
    """V = x on [0, 40]: hard edge at 0, soft edge at 4, mean 1."""
    m = solve_fixed_filling(AnalyticPotential.polynomial([0.0, 1.0]), Domain.from_pairs([[0.0, 40.0]]), [1.0])
    assert m.edges == pytest.approx([0.0, 4.0], abs=1e-8)
    assert m.types == [EdgeType.HARD, EdgeType.SOFT]
    assert m.moment(1) == pytest.approx(1.0, abs=1e-8)
    assert m.moment(2) == pytest.approx(2.0, abs=1e-8)


def test_arcsine_two_hard_edges():
    """V = 0 on [-2, 2]: arcsine law, second moment 2."""
    m = solve_fixed_filling(AnalyticPotential.polynomial([0.0]), Domain.from_pairs([[-2.0, 2.0]]), [1.0])
    assert m.types == [EdgeType.HARD, EdgeType.HARD]
    assert m.moment(2) == pytest.approx(2.0, abs=1e-8)
    assert m.density([0.0])[0] == pytest.approx(1.0 / (2 * math.pi), abs=1e-8)


def test_edge_partition_collects_hard_edges(semicircle):
    """L(x) is the product over hard edges: 1 for the semicircle, x^2 - 4 for the arcsine."""
    assert edge_partition(semicircle).roots == ()
    assert edge_partition(semicircle).L(5.0) == pytest.approx(1.0)
    m = solve_fixed_filling(AnalyticPotential.polynomial([0.0]), Domain.from_pairs([[-2.0, 2.0]]), [1.0])
    part = edge_partition(m)
    assert part.L(3.0) == pytest.approx(5.0, abs=1e-8)
    assert part.L1(3.0, 1.0) == pytest.approx(4.0, abs=1e-8)


class TestValidation:
    """Fillings the solver refuses."""

    def test_eps_must_sum_to_one(self):
        with pytest.raises(ParameterError):
            solve_fixed_filling(QUARTIC, QUARTIC_DOMAIN, [0.5, 0.6])

    def test_eps_length_matches_segments(self):
        with pytest.raises(ParameterError):
            solve_fixed_filling(QUARTIC, QUARTIC_DOMAIN, [1.0])


@pytest.mark.slow
class TestTwoCutQuartic:
    """V = x^4/4 - 2x^2 on two segments: cuts [-sqrt 6, -sqrt 2] and [sqrt 2, sqrt 6]."""

    @pytest.fixture(scope="class")
    def optimal(self):
        return solve_optimal(QUARTIC, QUARTIC_DOMAIN)

    def test_edges(self, optimal):
        m, _ = optimal
        expected = [-math.sqrt(6), -math.sqrt(2), math.sqrt(2), math.sqrt(6)]
        assert m.edges == pytest.approx(expected, abs=1e-8)

    def test_symmetric_fillings(self, optimal):
        m, eps = optimal
        assert eps == pytest.approx([0.5, 0.5], abs=1e-8)
        assert m.mass(0) == pytest.approx(0.5, abs=1e-8)

    def test_lagrange_constants_agree(self, optimal):
        """At eps* the gradient of F^{-2} in the fillings vanishes."""
        m, _ = optimal
        assert free_energy_gradient(m, 2.0) == pytest.approx([0.0], abs=1e-7)

    def test_fixed_filling_off_optimum_has_gradient(self):
        """Moving mass to the right cut produces a nonzero gradient."""
        m = solve_fixed_filling(QUARTIC, QUARTIC_DOMAIN, [0.4, 0.6])
        assert abs(free_energy_gradient(m, 2.0)[0]) > 1e-3
        assert m.mass(1) == pytest.approx(0.6, abs=1e-8)
