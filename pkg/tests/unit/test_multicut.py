"""Tests for the multi-cut expansion: theta block, filling law, linear statistics and kernels."""

import csv
import math

import numpy as np
import pytest

from src.loggas.errors import ParameterError
from src.loggas.harness.quadrature import monic_orthopoly, squared_norm
from src.loggas.harness.suites import GAUSSIAN, QUARTIC, QUARTIC_DOMAIN
from src.loggas.multicut import (
    expansion_context,
    filling_covariance,
    filling_lattice,
    filling_law,
    filling_mean,
    kernel_expansion,
    linear_stat_cf,
    linear_stat_mean,
    linear_stat_variance,
    orthopoly_asymptotics,
    partition_expansion,
    theta_oscillation_csv,
    toda_norm_expansion,
)
from src.loggas.potential import Domain
from src.loggas.selberg import selberg_exact

pytestmark = pytest.mark.slow

GAUSS_DOMAIN = Domain.from_pairs([[-8.0, 8.0]])


@pytest.fixture(scope="module")
def gaussian_ctx():
    return expansion_context(GAUSSIAN, GAUSS_DOMAIN, 2.0, 1)


@pytest.fixture(scope="module")
def quartic_ctx():
    return expansion_context(QUARTIC, QUARTIC_DOMAIN, 2.0, 0)


class TestOneCut:
    def test_theta_block_is_trivial(self, gaussian_ctx):
        report = gaussian_ctx.report(20)
        assert report.genus == 0
        assert report.theta_block == [1.0, 0.0]
        assert report.z_ratio_series[-1] == 1.0
        assert report.to_dict()["N"] == 20

    def test_report_arguments(self, gaussian_ctx):
        with pytest.raises(ParameterError):
            gaussian_ctx.report(0)
        with pytest.raises(ParameterError):
            gaussian_ctx.report(20, k_max=2)

    def test_filling_law_is_trivial(self, gaussian_ctx):
        report = gaussian_ctx.report(20)
        assert filling_law(report, [20]) == 1.0
        pts, prob = filling_lattice(report)
        assert pts.shape == (1, 0)
        assert prob.tolist() == [1.0]

    def test_variance_of_trace(self, gaussian_ctx):
        """GUE: Var(sum l_i) -> 1, Var(sum l_i^2) -> 2."""
        report = gaussian_ctx.report(20)
        assert linear_stat_variance(report, lambda z: z) == pytest.approx(1.0, abs=1e-8)
        assert linear_stat_variance(report, lambda z: z * z) == pytest.approx(2.0, abs=1e-8)

    def test_mean_and_characteristic_function(self, gaussian_ctx):
        report = gaussian_ctx.report(20)
        assert linear_stat_mean(report, lambda z: z) == pytest.approx(0.0, abs=1e-10)
        s = 0.7
        assert linear_stat_cf(report, lambda z: z, s) == pytest.approx(math.exp(-0.5 * s * s), abs=1e-8)

    def test_kernel_matches_hermite(self, gaussian_ctx):
        """E prod (x - l_i) at beta = 2 is the monic orthogonal polynomial."""
        n, x = 20, 3.0
        approx = kernel_expansion(gaussian_ctx.report(n), [x], [1.0], k_max=1)
        exact = monic_orthopoly(GAUSSIAN, GAUSS_DOMAIN, n, x)
        assert approx.value.real == pytest.approx(exact.real, rel=1e-2)
        assert not approx.multivalued
        assert approx.theta_ratio == 1.0

    def test_kernel_arguments(self, gaussian_ctx):
        report = gaussian_ctx.report(20)
        with pytest.raises(ParameterError, match="limited to k_max <= 1, got 2"):
            kernel_expansion(report, [3.0], [1.0], k_max=2)
        with pytest.raises(ParameterError):
            kernel_expansion(report, [3.0, 4.0], [1.0])


class TestTwoCut:
    def test_period_matrix_and_notes(self, quartic_ctx):
        assert quartic_ctx.genus == 1
        assert quartic_ctx.eps_star == pytest.approx([0.5, 0.5], abs=1e-8)
        assert abs(quartic_ctx.tau[0, 0].real) < 1e-6
        assert quartic_ctx.tau[0, 0].imag > 0
        assert any("Thetanullwert" in note for note in quartic_ctx.notes)

    def test_characteristic_follows_n(self, quartic_ctx):
        even = quartic_ctx.report(20).mu[0]
        assert min(even, 1.0 - even) < 1e-6
        assert quartic_ctx.report(21).mu[0] == pytest.approx(0.5, abs=1e-6)

    def test_filling_law_normalized(self, quartic_ctx):
        report = quartic_ctx.report(20)
        pts, prob = filling_lattice(report)
        assert prob.sum() == pytest.approx(1.0, abs=1e-8)
        assert filling_law(report, [10, 10]) == pytest.approx(filling_law(report, [10]))
        assert filling_law(report, [9]) == pytest.approx(filling_law(report, [11]), rel=1e-5)
        assert filling_mean(report) == pytest.approx([10.0], abs=1e-4)
        assert filling_covariance(report)[0, 0] > 0

    def test_filling_law_rejects_wrong_total(self, quartic_ctx):
        with pytest.raises(ParameterError):
            filling_law(quartic_ctx.report(20), [10, 11])

    def test_theta_factor_parity(self, quartic_ctx):
        """Even N centre on a lattice point and carry the larger theta factor."""
        factors = [quartic_ctx.report(n).z_ratio_series[0].real for n in (20, 21, 22)]
        assert factors[0] > factors[1] < factors[2]

    def test_variance_with_filling_fluctuations(self, quartic_ctx):
        """Odd observables feel the filling fluctuations; the fixed-filling variance omits them."""
        report = quartic_ctx.report(20)
        fixed = linear_stat_variance(report, lambda z: z, fixed_filling=True)
        free = linear_stat_variance(report, lambda z: z)
        assert fixed > 0
        assert free > fixed

    def test_oscillation_csv(self, quartic_ctx, tmp_path):
        path = theta_oscillation_csv(quartic_ctx, [20, 21], tmp_path / "theta.csv")
        with open(path) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["N", "theta_factor_re", "theta_factor_im", "parity"]
        assert [r[3] for r in rows[1:]] == ["0", "1"]
        assert float(rows[1][1]) > float(rows[2][1])
        assert np.isfinite(float(rows[1][2]))


class TestGaussianAsymptotics:
    """One-cut Gaussian checks against exact finite-N values."""

    def test_log_partition_matches_selberg(self):
        report = partition_expansion(GAUSSIAN, GAUSS_DOMAIN, 2.0, 20, 1)
        assert report.log_partition() == pytest.approx(float(selberg_exact("++", 20, 2.0)), abs=1e-3)

    def test_orthopoly(self):
        n, x = 16, 3.5
        approx = orthopoly_asymptotics(GAUSSIAN, GAUSS_DOMAIN, 1.0, n, x, k_max=1)
        exact = monic_orthopoly(GAUSSIAN, GAUSS_DOMAIN, n, x)
        assert approx.real == pytest.approx(exact.real, rel=1e-2)

    def test_toda_norm(self):
        """u_n = log h_n for the weight exp(-n x^2 / 2)."""
        n = 10
        norm = toda_norm_expansion(GAUSSIAN, GAUSS_DOMAIN, 1.0, n, k_max=1)
        exact = math.log(squared_norm(GAUSSIAN, GAUSS_DOMAIN, n, float(n)))
        assert norm.value == pytest.approx(exact, abs=1e-3)
        assert norm.to_dict()["u_n"] == norm.value

    def test_toda_norm_arguments(self):
        with pytest.raises(ParameterError):
            toda_norm_expansion(GAUSSIAN, GAUSS_DOMAIN, 1.0, 0)
        with pytest.raises(ParameterError):
            orthopoly_asymptotics(GAUSSIAN, GAUSS_DOMAIN, -1.0, 10, 3.0)
