"""Unit tests for the Metropolis sampler."""

import numpy as np
import pytest

from src.loggas.errors import ParameterError
from src.loggas.harness.sampler import ChainConfig, read_binary, sample, segment_of
from src.loggas.harness.suites import GAUSSIAN, QUARTIC, QUARTIC_DOMAIN
from src.loggas.potential import Domain

GAUSS_DOMAIN = Domain.from_pairs([[-8.0, 8.0]])


def small_config(**overrides):
    data = dict(N=4, beta=2.0, steps=300, burn_in=100, step_size=0.3, seed=11, chains=2, thin=5)
    data.update(overrides)
    return ChainConfig(**data)


class TestChainConfig:
    @pytest.mark.parametrize("overrides", [
        {"N": 0},
        {"beta": 0.0},
        {"burn_in": 300},
        {"step_size": -0.1},
        {"chains": 0},
        {"fixed_filling": (1, 1)},
    ])
    def test_rejects_invalid(self, overrides):
        with pytest.raises(ParameterError):
            small_config(**overrides)

    def test_fixed_filling_must_match_segments(self):
        cfg = small_config(fixed_filling=(4,))
        with pytest.raises(ParameterError):
            sample(QUARTIC, QUARTIC_DOMAIN, cfg)


class TestChains:
    def test_same_seed_same_samples(self):
        a = sample(QUARTIC, QUARTIC_DOMAIN, small_config())
        b = sample(QUARTIC, QUARTIC_DOMAIN, small_config())
        assert np.array_equal(a.configurations, b.configurations)

    def test_chain_independent_of_chain_count(self):
        """Chain 0 is the same whether it runs alone or next to another chain."""
        one = sample(QUARTIC, QUARTIC_DOMAIN, small_config(chains=1))
        two = sample(QUARTIC, QUARTIC_DOMAIN, small_config(chains=2))
        assert np.array_equal(one.per_chain()[0], two.per_chain()[0])

    def test_shapes_and_diagnostics(self):
        batch = sample(QUARTIC, QUARTIC_DOMAIN, small_config())
        assert batch.N == 4
        assert batch.count == 2 * 40
        assert np.all(segment_of(batch.configurations, batch.segment_bounds) >= 0)
        diag = batch.diagnostics()
        assert 0.0 < diag["acceptance_rate"] <= 1.0
        assert len(diag["step_sizes"]) == 2
        assert batch.rng_trace["seed"] == 11

    def test_fixed_filling_is_preserved(self):
        batch = sample(QUARTIC, QUARTIC_DOMAIN, small_config(fixed_filling=(1, 3)))
        assert np.all(batch.fillings() == np.array([1, 3]))
        assert np.all(batch.crossings == 0)

    def test_binary_round_trip(self, tmp_path):
        batch = sample(QUARTIC, QUARTIC_DOMAIN, small_config())
        path = batch.write_binary(tmp_path / "samples.bin")
        beta, configs = read_binary(path)
        assert beta == 2.0
        assert np.array_equal(configs, batch.configurations)

    def test_truncated_binary(self, tmp_path):
        batch = sample(QUARTIC, QUARTIC_DOMAIN, small_config())
        path = batch.write_binary(tmp_path / "samples.bin")
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(ParameterError):
            read_binary(path)


def test_segment_of():
    bounds = np.array([[-4.0, -0.05], [0.05, 4.0]])
    out = segment_of([-1.0, 0.0, 2.0, 5.0, -4.0], bounds)
    assert out.tolist() == [0, -1, 1, -1, 0]


@pytest.mark.slow
def test_single_particle_gaussian():
    """At N = 1, beta = 2 the target is the standard normal."""
    cfg = ChainConfig(N=1, beta=2.0, steps=20000, burn_in=1000, step_size=1.0, seed=3, chains=2, thin=2)
    x = sample(GAUSSIAN, GAUSS_DOMAIN, cfg).configurations[:, 0]
    assert abs(x.mean()) < 0.1
    assert x.var() == pytest.approx(1.0, abs=0.1)
