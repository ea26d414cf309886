"""Unit tests for the structured JSON logger."""

import json

from src.logging.json_logger import VERBOSE_ENV, JSONLogger


def test_info_line_fields(capsys):
    logger = JSONLogger(component="solver", run_id="run-1")
    logger.info("equilibrium solved", {"residual": 1e-12})
    entry = json.loads(capsys.readouterr().out.strip())
    assert entry["component"] == "solver"
    assert entry["run_id"] == "run-1"
    assert entry["level"] == "INFO"
    assert entry["metadata"] == {"residual": 1e-12}
    assert "timestamp" in entry


def test_debug_gated_by_environment(capsys, monkeypatch):
    monkeypatch.delenv(VERBOSE_ENV, raising=False)
    logger = JSONLogger(component="sampler")
    logger.debug("tuning")
    assert capsys.readouterr().out == ""
    monkeypatch.setenv(VERBOSE_ENV, "1")
    logger.debug("tuning")
    assert json.loads(capsys.readouterr().out)["level"] == "DEBUG"


def test_log_file_and_child_share_run_id(tmp_path, capsys):
    path = tmp_path / "logs" / "run.jsonl"
    logger = JSONLogger(component="cli", log_file=str(path))
    logger.warn("margin small")
    logger.child("recursion").error("contour failed")
    lines = [json.loads(line) for line in path.read_text().splitlines()]
    assert [line["level"] for line in lines] == ["WARN", "ERROR"]
    assert lines[0]["run_id"] == lines[1]["run_id"]
    assert lines[1]["component"] == "recursion"
    capsys.readouterr()
