"""Unit tests for potentials, domains and log charges."""

import math

import numpy as np
import pytest

from src.loggas.errors import InvalidChargeError, SingularityError, ValidationFailure
from src.loggas.potential import (
    AnalyticPotential,
    Domain,
    LogCharge,
    PotentialPiece,
    evaluate,
    evaluate_derivative,
    perturb_with_logs,
)


def test_polynomial_value_and_derivatives():
    """V = x^2/2 evaluates with its first two derivatives."""
    p = AnalyticPotential.polynomial([0.0, 0.0, 0.5])
    assert evaluate(p, 2.0) == pytest.approx(2.0)
    assert evaluate_derivative(p, 2.0) == pytest.approx(2.0)
    assert evaluate_derivative(p, 2.0, order=2) == pytest.approx(1.0)
    assert evaluate_derivative(p, 2.0, order=3) == pytest.approx(0.0)


def test_subleading_orders_enter_with_powers_of_n_inverse():
    """V^{1} contributes n_inverse * V^{1}; zero n_inverse drops it."""
    p = AnalyticPotential((PotentialPiece(poly=(0.0, 1.0)), PotentialPiece(poly=(3.0,))))
    assert p.max_order == 1
    assert p.value(1.0) == pytest.approx(1.0)
    assert p.value(1.0, 0.5) == pytest.approx(2.5)


def test_log_charge_value_and_derivative():
    """c log(z - x) and its derivative -c/(z - x)."""
    q = LogCharge(location=3.0 + 0.0j, charge=2.0)
    x = np.array([1.0 + 0.0j])
    assert q.value(x)[0] == pytest.approx(2.0 * math.log(2.0))
    assert q.derivative(x, 1)[0] == pytest.approx(-1.0)
    assert q.derivative(x, 2)[0] == pytest.approx(-0.5)


def test_evaluation_at_charge_raises():
    """Evaluating exactly at a charge location is a SingularityError."""
    p = AnalyticPotential.polynomial([0.0]).with_piece(0, PotentialPiece(charges=(LogCharge(5.0, 1.0),)))
    with pytest.raises(SingularityError):
        p.value(5.0)


def test_scaled_multiplies_every_piece():
    """scaled(2) doubles polynomial and charges alike."""
    p = AnalyticPotential.polynomial([1.0, 2.0]).with_piece(1, PotentialPiece(charges=(LogCharge(4.0, 1.0),)))
    s = p.scaled(2.0)
    assert s.piece(0).poly == (2.0, 4.0)
    assert s.piece(1).charges[0].charge == 2.0


class TestDomain:
    """Domain construction and queries."""

    def test_genus_and_hull(self):
        """Two segments give genus 1."""
        d = Domain.from_pairs([[-4.0, -1.0], [1.0, 4.0]])
        assert d.genus == 1
        assert d.hull == (-4.0, 4.0)
        assert d.to_pairs() == [[-4.0, -1.0], [1.0, 4.0]]

    def test_overlapping_segments_rejected(self):
        """Segments must be disjoint and increasing."""
        with pytest.raises(ValidationFailure):
            Domain.from_pairs([[-1.0, 1.0], [0.5, 2.0]])

    def test_empty_segment_rejected(self):
        """A segment with lo >= hi is invalid."""
        with pytest.raises(ValidationFailure):
            Domain.from_pairs([[1.0, 1.0]])

    def test_distance_and_segment_index(self):
        """Distance is zero on a segment and Euclidean off it."""
        d = Domain.from_pairs([[-4.0, -1.0], [1.0, 4.0]])
        assert d.distance(0.0 + 0.0j) == pytest.approx(1.0)
        assert d.distance(2.0 + 3.0j) == pytest.approx(3.0)
        assert d.segment_index(-2.0) == 0
        assert d.segment_index(3.0) == 1
        assert d.segment_index(0.0) is None


class TestPerturbWithLogs:
    """Log-charge perturbations used by kernel expansions."""

    def test_charge_stored_at_order_one(self):
        """The shift -(2/beta) c log(x - .) lives in V^{1}."""
        p = AnalyticPotential.polynomial([0.0, 0.0, 0.5])
        d = Domain.from_pairs([[-3.0, 3.0]])
        out = perturb_with_logs(p, [5.0], [1.0], beta=2.0, domain=d)
        assert out.max_order == 1
        charge = out.piece(1).charges[0]
        assert charge.location == 5.0
        assert charge.charge == pytest.approx(-1.0)

    def test_charge_on_domain_rejected(self):
        """A point on the domain is an InvalidChargeError."""
        p = AnalyticPotential.polynomial([0.0, 0.0, 0.5])
        d = Domain.from_pairs([[-3.0, 3.0]])
        with pytest.raises(InvalidChargeError):
            perturb_with_logs(p, [1.0], [1.0], beta=2.0, domain=d)

    def test_length_mismatch_rejected(self):
        """points and charges must pair up."""
        p = AnalyticPotential.polynomial([0.0])
        with pytest.raises(InvalidChargeError):
            perturb_with_logs(p, [5.0, 6.0], [1.0], beta=2.0)

    def test_left_point_uses_left_branch(self):
        """A real point left of the domain gets the branch pointing away from it."""
        p = AnalyticPotential.polynomial([0.0])
        d = Domain.from_pairs([[-3.0, 3.0]])
        out = perturb_with_logs(p, [-5.0], [1.0], beta=2.0, domain=d)
        charge = out.piece(1).charges[0]
        assert charge.left_branch
        val = charge.value(np.array([0.0 + 0.0j]))[0]
        assert val.real == pytest.approx(-math.log(5.0))
