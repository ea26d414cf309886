"""Unit tests for the shared run plumbing."""

import json

import pytest
from pydantic import ValidationError

from src.loggas.base import BaseRun

CONFIG = """\
potential:
  poly: [0.0, 0.0, 0.5]
domain:
  segments: [[-8.0, 8.0]]
N: 10
"""


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "gaussian.yaml"
    path.write_text(CONFIG)
    return str(path)


def test_load_yaml_with_dotted_overrides(config_file):
    run = BaseRun("sample")
    cfg = run.load_config(config_file, {"sampler.steps": 5000, "N": 12, "seed": None})
    assert cfg.sampler.steps == 5000
    assert cfg.N == 12
    assert cfg.seed is None


def test_load_json(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"potential": {"poly": [0.0, 1.0]}, "domain": {"segments": [[0.0, 40.0]]}}))
    assert BaseRun("eq-solve").load_config(str(path)).build_domain().hull == (0.0, 40.0)


def test_missing_file():
    with pytest.raises(FileNotFoundError):
        BaseRun("eq-solve").load_config("does/not/exist.yaml")


def test_unsupported_suffix(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text("N = 3")
    with pytest.raises(ValueError):
        BaseRun("eq-solve").load_config(str(path))


def test_override_is_validated(config_file):
    with pytest.raises(ValidationError):
        BaseRun("eq-solve").load_config(config_file, {"beta": -1.0})


def test_report_carries_provenance(config_file, tmp_path):
    run = BaseRun("eq-solve")
    run.load_config(config_file)
    run.get_seed(str(tmp_path / "seed_manifest.json"), 5)
    path = run.write_report(str(tmp_path / "out" / "report.json"), {"energy": 0.75})
    payload = json.loads(path.read_text())
    assert payload["command"] == "eq-solve"
    assert payload["seed"] == 5
    assert payload["config"]["N"] == 10
    assert payload["result"] == {"energy": 0.75}
    assert "generated_at" in payload
