"""Unit tests for seed management."""

import json

import numpy as np

from src.util.seed import chain_generators, generate_or_load_seed


def test_explicit_seed_is_written(tmp_path):
    manifest = tmp_path / "seed_manifest.json"
    assert generate_or_load_seed(str(manifest), 123) == 123
    assert json.loads(manifest.read_text())["seed"] == 123


def test_stored_seed_is_reused(tmp_path):
    manifest = tmp_path / "seed_manifest.json"
    manifest.write_text(json.dumps({"seed": 77, "other": "kept"}))
    assert generate_or_load_seed(str(manifest)) == 77


def test_fresh_seed_is_persisted(tmp_path):
    manifest = tmp_path / "nested" / "seed_manifest.json"
    seed = generate_or_load_seed(str(manifest))
    assert 1 <= seed < 2 ** 31
    assert generate_or_load_seed(str(manifest)) == seed


def test_corrupt_manifest_falls_back(tmp_path):
    manifest = tmp_path / "seed_manifest.json"
    manifest.write_text("{not json")
    seed = generate_or_load_seed(str(manifest))
    assert json.loads(manifest.read_text())["seed"] == seed


def test_chain_streams_do_not_depend_on_chain_count():
    """Chain i draws the same numbers whether 2 or 5 chains are spawned."""
    two = chain_generators(9, 2)
    five = chain_generators(9, 5)
    assert np.array_equal(two[1].random(4), five[1].random(4))
    assert not np.array_equal(chain_generators(9, 2)[0].random(4), chain_generators(9, 2)[1].random(4))
