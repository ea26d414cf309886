"""Unit tests for Monte Carlo estimators."""

import numpy as np
import pytest

from src.loggas.errors import ParameterError
from src.loggas.harness.estimators import (
    estimate_filling_histogram,
    estimate_linear_stat,
    estimate_moments,
    expected_char_poly,
    integrated_autocorrelation,
    jackknife,
    ks_distance,
    total_variation,
)
from src.loggas.harness.sampler import SampleBatch


def make_batch(configurations):
    configs = np.asarray(configurations, dtype=float)
    return SampleBatch(
        configurations=configs,
        chain=np.zeros(configs.shape[0], dtype=np.int64),
        acceptance_rate=0.3,
        chain_acceptance=np.array([0.3]),
        step_sizes=np.array([0.2]),
        crossings=np.array([0], dtype=np.int64),
        beta=2.0,
        segment_bounds=np.array([[-2.0, -0.5], [0.5, 3.0]]),
    )


class TestJackknife:
    def test_mean_error_is_standard_error(self):
        values = np.arange(40, dtype=float)
        val, err = jackknife(values, blocks=40)
        assert val == pytest.approx(19.5)
        assert err == pytest.approx(np.std(values, ddof=1) / np.sqrt(40))

    def test_single_sample(self):
        val, err = jackknife([3.0])
        assert val == 3.0
        assert np.isnan(err)

    def test_empty(self):
        with pytest.raises(ParameterError):
            jackknife([])


class TestAutocorrelation:
    def test_white_noise(self):
        x = np.random.default_rng(0).standard_normal(20000)
        assert integrated_autocorrelation(x) == pytest.approx(1.0, abs=0.2)

    def test_correlated_series(self):
        rng = np.random.default_rng(1)
        x = np.zeros(20000)
        for i in range(1, x.size):
            x[i] = 0.9 * x[i - 1] + rng.standard_normal()
        assert integrated_autocorrelation(x) > 10.0

    def test_constant_series(self):
        assert integrated_autocorrelation(np.ones(100)) == 1.0


def test_total_variation():
    assert total_variation({(1,): 0.5, (2,): 0.5}, {(1,): 1.0}) == pytest.approx(0.5)
    assert total_variation({(0, 1): 1.0}, {(0, 1): 1.0}) == 0.0


def test_ks_distance_of_midpoints():
    n = 50
    samples = (np.arange(n) + 0.5) / n
    assert ks_distance(samples, lambda x: x) == pytest.approx(0.5 / n)


class TestBatchEstimators:
    def test_moments(self):
        batch = make_batch([[-1.0, 1.0], [1.0, 2.0]] * 10)
        moments = estimate_moments(batch, [1, 2])
        assert moments[1].real == pytest.approx(0.75)
        assert moments[2].real == pytest.approx(1.75)
        assert moments[1].samples == 20
        assert "autocorrelation_time" in moments[1].diagnostics

    def test_linear_statistic(self):
        batch = make_batch([[-1.0, 1.0], [1.0, 2.0]] * 10)
        out = estimate_linear_stat(batch, lambda x: x, centre=1.5)
        assert out["mean"].real == pytest.approx(0.0)
        assert out["variance"].real == pytest.approx(np.var([-1.5, 1.5] * 10, ddof=1))

    def test_filling_histogram(self):
        batch = make_batch([[-1.0, 1.0], [1.0, 2.0], [1.0, 2.5], [-1.5, 0.7]])
        hist = estimate_filling_histogram(batch)
        assert set(hist) == {(1,), (2,)}
        assert hist[(1,)].real == pytest.approx(0.5)
        assert hist[(2,)].real == pytest.approx(0.5)

    def test_char_poly(self):
        batch = make_batch([[1.0, 2.0]] * 8)
        plain = expected_char_poly(batch, 3.0)
        assert plain.value == pytest.approx(2.0)
        assert plain.flags == []
        skew = expected_char_poly(batch, 3.0, "skew-odd")
        assert skew.value == pytest.approx(12.0)

    def test_char_poly_flags_noise(self):
        batch = make_batch([[1.0, 2.0], [1.0, 2.9], [0.8, 2.5], [-1.0, 3.0]] * 5)
        est = expected_char_poly(batch, 2.5, variance_limit=1e-6)
        assert "high-variance" in est.flags

    def test_char_poly_signature(self):
        with pytest.raises(ParameterError):
            expected_char_poly(make_batch([[1.0, 2.0]]), 3.0, "odd")  # type: ignore[arg-type]

    def test_estimate_to_dict(self):
        est = expected_char_poly(make_batch([[1.0, 2.0]] * 4), 3.0)
        out = est.to_dict()
        assert out["value"] == pytest.approx(2.0)
        assert out["samples"] == 4
