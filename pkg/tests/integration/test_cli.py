"""End-to-end tests of the loggas command line: reports, files and exit codes."""

import json
import math

import pytest

from src.loggas import main
from src.loggas.errors import SolverError
from src.loggas.harness.suites import Check, SuiteReport

GAUSSIAN_CONFIG = "\n".join([
    "seed: 5",
    "N: 3",
    "potential:",
    "  poly: [0.0, 0.0, 0.5]",
    "domain:",
    "  segments: [[-8.0, 8.0]]",
    "sampler:",
    "  steps: 200",
    "  burn_in: 50",
    "  chains: 2",
    "  thin: 5",
]) + "\n"


@pytest.fixture
def config_file(tmp_path):
    cfg = tmp_path / "gaussian.yaml"
    cfg.write_text(GAUSSIAN_CONFIG)
    return str(cfg)


def read_report(path):
    with open(path) as f:
        return json.load(f)


class TestEqSolve:
    def test_report_and_csv(self, config_file, tmp_path):
        out = tmp_path / "eq.json"
        csv_path = tmp_path / "density.csv"
        code = main.run(["eq-solve", "--config", config_file, "--out", str(out), "--csv", str(csv_path)])
        assert code == 0
        payload = read_report(out)
        assert set(payload) == {"command", "config", "seed", "generated_at", "result"}
        assert payload["command"] == "eq-solve"
        assert payload["config"]["potential"]["poly"] == [0.0, 0.0, 0.5]
        assert payload["result"]["energy"] == pytest.approx(0.75, abs=1e-7)
        assert payload["result"]["eps_star"] == pytest.approx([1.0])
        assert csv_path.read_text().splitlines()[0] == "x,density"

    def test_unknown_key_is_invalid_input(self, tmp_path):
        cfg = tmp_path / "bad.yaml"
        cfg.write_text(GAUSSIAN_CONFIG + "temperature: 3\n")
        assert main.run(["eq-solve", "--config", str(cfg), "--out", str(tmp_path / "eq.json")]) == 2
        assert not (tmp_path / "eq.json").exists()

    def test_missing_config(self, tmp_path):
        assert main.run(["eq-solve", "--config", str(tmp_path / "nope.yaml")]) == 2

    def test_solver_failure_is_numerical(self, config_file, tmp_path, monkeypatch):
        def failing(*args, **kwargs):
            raise SolverError("did not converge", residual_trace=[1.0, 0.5])

        monkeypatch.setattr(main, "solve_optimal", failing)
        assert main.run(["eq-solve", "--config", config_file, "--out", str(tmp_path / "eq.json")]) == 3


def test_selberg_report(tmp_path):
    out = tmp_path / "selberg.json"
    assert main.run(["selberg", "--signature", "++", "--N", "2", "--out", str(out)]) == 0
    result = read_report(out)["result"]
    assert result["log_Z_quadrature"] == pytest.approx(result["log_Z_exact"], abs=1e-7)
    assert result["e"] == pytest.approx(5.0 / 12.0)


def test_selberg_large_n_skips_quadrature(tmp_path):
    out = tmp_path / "selberg.json"
    assert main.run(["selberg", "--signature=++", "--N", "50", "--beta", "1.0", "--out", str(out)]) == 0
    assert "log_Z_quadrature" not in read_report(out)["result"]


def test_theta_eval(tmp_path):
    out = tmp_path / "theta.json"
    assert main.run(["theta-eval", "--tau", "[[[0, 1]]]", "--out", str(out)]) == 0
    re_part, im_part = read_report(out)["result"]["theta"]
    assert re_part == pytest.approx(math.pi ** 0.25 / math.gamma(0.75), abs=1e-12)
    assert im_part == pytest.approx(0.0, abs=1e-14)


def test_theta_eval_rejects_lower_half_plane(tmp_path):
    assert main.run(["theta-eval", "--tau", "[[[0, -1]]]", "--out", str(tmp_path / "t.json")]) == 2


class TestSample:
    def test_binary_report_and_manifest(self, config_file, tmp_path):
        out = tmp_path / "run" / "samples.bin"
        assert main.run(["sample", "--config", config_file, "--out", str(out)]) == 0
        assert out.exists()
        manifest = json.loads((tmp_path / "run" / "seed_manifest.json").read_text())
        assert manifest["seed"] == 5
        report = read_report(tmp_path / "run" / "samples.json")
        assert report["seed"] == 5
        assert report["result"]["rng_trace"]["generator"] == "PCG64"

    def test_same_seed_same_file(self, config_file, tmp_path):
        first = tmp_path / "a" / "samples.bin"
        second = tmp_path / "b" / "samples.bin"
        assert main.run(["sample", "--config", config_file, "--out", str(first), "--seed", "9"]) == 0
        assert main.run(["sample", "--config", config_file, "--out", str(second), "--seed", "9"]) == 0
        assert first.read_bytes() == second.read_bytes()

    def test_inconsistent_steps(self, config_file, tmp_path):
        """Overriding steps below burn_in is a configuration error."""
        assert main.run(["sample", "--config", config_file, "--out", str(tmp_path / "s.bin"), "--steps", "10"]) == 2


class TestVerify:
    def test_theta_suite(self, tmp_path):
        out = tmp_path / "verify.json"
        assert main.run(["verify", "--suite", "theta", "--quick", "--out", str(out)]) == 0
        payload = read_report(out)
        assert payload["result"]["passed"] is True
        assert payload["seed"] == 7

    def test_failed_suite_exit_code(self, tmp_path, monkeypatch):
        def failing(name, quick=False, seed=7, logger=None):
            return SuiteReport(name, [Check("forced", 1.0, 0.0, 0.0, False)])

        monkeypatch.setattr(main, "run_suite", failing)
        out = tmp_path / "verify.json"
        assert main.run(["verify", "--suite", "theta", "--out", str(out)]) == 3
        assert read_report(out)["result"]["passed"] is False
