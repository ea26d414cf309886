"""Command-line entry point for the log-gas toolkit."""

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
import numpy.typing as npt
import yaml
from pydantic import ValidationError

from src.loggas.base import BaseRun
from src.loggas.equilibrium import EquilibriumMeasure, density_csv, solve_fixed_filling, solve_optimal
from src.loggas.errors import LogGasError, ParameterError
from src.loggas.freeenergy import free_energy_series
from src.loggas.harness.estimators import estimate_filling_histogram, estimate_moments
from src.loggas.harness.quadrature import monic_orthopoly, partition_quadrature, squared_norm
from src.loggas.harness.sampler import ChainConfig, sample
from src.loggas.harness.suites import SUITES, REFERENCE_MODELS, run_suite
from src.loggas.multicut import expansion_context, orthopoly_asymptotics, theta_oscillation_csv, toda_norm_expansion
from src.loggas.selberg import SIGNATURES, prefactor_exponent, selberg_asymptotic, selberg_exact
from src.loggas.theta import ThetaParams, lattice_size, theta
from src.logging.json_logger import JSONLogger

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3


def _complex_pairs(raw: str) -> npt.NDArray[np.complex128]:
    """JSON nested lists whose leaves are [re, im] pairs (or plain reals) to a complex array."""
    data = np.asarray(json.loads(raw), dtype=float)
    if data.ndim and data.shape[-1] == 2:
        return np.asarray(data[..., 0] + 1j * data[..., 1], dtype=np.complex128)
    return np.asarray(data, dtype=np.complex128)


def _out_path(run: BaseRun, args: argparse.Namespace, default: str) -> str:
    if getattr(args, "out", None):
        return str(args.out)
    if run.config is not None and run.config.output.out:
        return run.config.output.out
    return default


def _prepare(args: argparse.Namespace, command: str, overrides: Optional[Dict[str, Any]] = None) -> BaseRun:
    run = BaseRun(command)
    merged = {"seed": getattr(args, "seed", None), "output.out": getattr(args, "out", None)}
    merged.update(overrides or {})
    cfg = run.load_config(args.config, merged)
    run.setup_logging(getattr(args, "log_file", None) or cfg.output.log_file)
    return run


def _seed(run: BaseRun, out: str) -> int:
    assert run.config is not None
    return run.get_seed(str(Path(out).parent / "seed_manifest.json"), run.config.seed)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_eq_solve(args: argparse.Namespace) -> Dict[str, Any]:
    run = _prepare(args, "eq-solve")
    cfg, logger = run.config, run.logger
    assert cfg is not None
    p, d = cfg.build_potential(), cfg.build_domain()
    if cfg.filling == "fixed":
        assert cfg.eps is not None
        m = solve_fixed_filling(p, d, cfg.eps, config=cfg.solver, logger=logger)
        eps_star: Optional[List[float]] = None
    else:
        m, eps = solve_optimal(p, d, cfg.solver, logger)
        eps_star = eps.tolist()
    result: Dict[str, Any] = {
        "measure": m.to_dict(),
        "eps_star": eps_star,
        "energy": m.energy(),
        "offcritical_margin": m.offcritical_margin(),
        "moments": {str(k): m.moment(k) for k in range(1, 5)},
    }
    csv_path = args.csv or cfg.output.csv
    if csv_path:
        result["csv"] = str(density_csv(m, csv_path))
    out = _out_path(run, args, "eq_solve.json")
    run.write_report(out, result)
    return result


def cmd_expand(args: argparse.Namespace) -> Dict[str, Any]:
    run = _prepare(args, "expand", {"expansion.k_max": args.order})
    cfg, logger = run.config, run.logger
    assert cfg is not None
    p, d = cfg.build_potential(), cfg.build_domain()
    if cfg.filling == "fixed":
        assert cfg.eps is not None
        eps: Sequence[float] = cfg.eps
        m: Optional[EquilibriumMeasure] = None
    else:
        m, eps_star = solve_optimal(p, d, cfg.solver, logger)
        eps = eps_star.tolist()
    series = free_energy_series(
        p, d, eps, cfg.expansion.k_max, cfg.beta, cfg.expansion, cfg.solver, measure=m, refine=args.refine, logger=logger
    )
    result = series.to_dict()
    run.write_report(_out_path(run, args, "expand.json"), result)
    return result


def cmd_theta_eval(args: argparse.Namespace) -> Dict[str, Any]:
    run = BaseRun("theta-eval")
    run.setup_logging(args.log_file)
    tau = np.atleast_2d(_complex_pairs(args.tau))
    g = tau.shape[0]
    v = _complex_pairs(args.v) if args.v else np.zeros(g, dtype=complex)
    mu = np.asarray(json.loads(args.mu), dtype=float) if args.mu else np.zeros(g)
    nu = np.asarray(json.loads(args.nu), dtype=float) if args.nu else np.zeros(g)
    params = ThetaParams.build(tau, v, mu, nu)
    value = theta(params)
    result: Dict[str, Any] = {
        "theta": [value.real, value.imag],
        "lattice_points": lattice_size(params),
        "g": g,
    }
    run.write_report(args.out or "theta_eval.json", result)
    return result


def cmd_multicut(args: argparse.Namespace) -> Dict[str, Any]:
    run = _prepare(args, "multicut", {"N": args.N, "expansion.k_max": args.order})
    cfg, logger = run.config, run.logger
    assert cfg is not None
    ctx = expansion_context(
        cfg.build_potential(), cfg.build_domain(), cfg.beta, cfg.expansion.k_max, cfg.expansion, cfg.solver, logger
    )
    report = ctx.report(cfg.N)
    result = report.to_dict()
    csv_path = args.csv or cfg.output.csv
    if csv_path:
        lo, hi = (int(s) for s in (args.sweep or f"{cfg.N}:{cfg.N}").split(":"))
        result["csv"] = str(theta_oscillation_csv(ctx, list(range(lo, hi + 1)), csv_path))
    run.write_report(_out_path(run, args, "multicut.json"), result)
    return result


def cmd_selberg(args: argparse.Namespace) -> Dict[str, Any]:
    run = BaseRun("selberg")
    logger = run.setup_logging(args.log_file)
    sig = args.signature
    exact = float(selberg_exact(sig, args.N, args.beta))
    asym = selberg_asymptotic(sig, args.beta)
    result: Dict[str, Any] = {
        "signature": sig,
        "N": args.N,
        "beta": args.beta,
        "log_Z_exact": exact,
        "log_Z_predicted": asym.predict(float(args.N)),
        "asymptotics": asym.as_dict(),
        "e": prefactor_exponent(sig, args.beta),
    }
    if args.N <= 4:
        p, d = REFERENCE_MODELS[sig]
        result["log_Z_quadrature"] = partition_quadrature(p, d, args.N, args.beta, logger)
    run.write_report(args.out or "selberg.json", result)
    return result


def cmd_sample(args: argparse.Namespace) -> Dict[str, Any]:
    run = _prepare(args, "sample", {"sampler.steps": args.steps})
    cfg, logger = run.config, run.logger
    assert cfg is not None
    out = _out_path(run, args, "samples.bin")
    seed = _seed(run, out)
    p, d = cfg.build_potential(), cfg.build_domain()
    batch = sample(p, d, ChainConfig.from_run(cfg, seed), logger)
    batch.write_binary(out)
    moments = estimate_moments(batch, [1, 2])
    result: Dict[str, Any] = {
        "samples_file": out,
        "diagnostics": batch.diagnostics(),
        "rng_trace": batch.rng_trace,
        "moments": {str(k): e.to_dict() for k, e in moments.items()},
    }
    if d.genus:
        hist = estimate_filling_histogram(batch)
        result["filling_histogram"] = {",".join(map(str, k)): e.real for k, e in hist.items()}
    run.write_report(str(Path(out).with_suffix(".json")), result)
    return result


def cmd_opoly(args: argparse.Namespace) -> Dict[str, Any]:
    run = _prepare(args, "opoly", {"expansion.k_max": args.order})
    cfg, logger = run.config, run.logger
    assert cfg is not None
    if cfg.beta != 2.0:
        raise ParameterError("opoly needs beta = 2", beta=cfg.beta)
    p, d = cfg.build_potential(), cfg.build_domain()
    k_max = min(cfg.expansion.k_max, 1)
    value = orthopoly_asymptotics(p, d, args.s, args.n, complex(args.x), k_max, cfg.expansion, cfg.solver, logger)
    norm = toda_norm_expansion(p, d, args.s, args.n, k_max, cfg.expansion, cfg.solver, logger)
    result: Dict[str, Any] = {
        "n": args.n,
        "s": args.s,
        "x": args.x,
        "P_n": [value.real, value.imag],
        "toda": norm.to_dict(),
    }
    if p.max_order == 0 and not p.piece(0).charges:
        scale = args.n / args.s
        exact = monic_orthopoly(p, d, args.n, complex(args.x), scale)
        result["P_n_moment_determinant"] = [exact.real, exact.imag]
        result["u_n_moment_determinant"] = float(np.log(squared_norm(p, d, args.n, scale)))
    run.write_report(_out_path(run, args, "opoly.json"), result)
    return result


def cmd_verify(args: argparse.Namespace) -> Dict[str, Any]:
    run = BaseRun("verify")
    logger = run.setup_logging(args.log_file)
    names = list(SUITES) if args.suite == "all" else [args.suite]
    reports = [run_suite(name, quick=args.quick, seed=args.seed, logger=logger) for name in names]
    for r in reports:
        print(r.table(), file=sys.stderr)
    result = {"passed": all(r.passed for r in reports), "suites": [r.to_dict() for r in reports]}
    run.seed = args.seed
    run.write_report(args.out or "verify.json", result)
    return result


COMMANDS: Dict[str, Callable[[argparse.Namespace], Dict[str, Any]]] = {
    "eq-solve": cmd_eq_solve,
    "expand": cmd_expand,
    "theta-eval": cmd_theta_eval,
    "multicut": cmd_multicut,
    "selberg": cmd_selberg,
    "sample": cmd_sample,
    "opoly": cmd_opoly,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="loggas",
        description="Large-N expansions of multi-cut beta-ensembles, with verification oracles",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Equilibrium measure of the two-cut quartic
  python -m src.loggas.main eq-solve --config src/config/two_cut_quartic.yaml --out eq.json

  # Partition function expansion with a theta-factor sweep
  python -m src.loggas.main multicut --config src/config/two_cut_quartic.yaml --N 40 --order 1 --csv theta.csv --sweep 10:60

  # Acceptance suite
  python -m src.loggas.main verify --suite selberg-small-N
        """,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def with_config(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="Path to a YAML or JSON run configuration")
        p.add_argument("--out", help="JSON report path (overrides output.out)")
        p.add_argument("--seed", type=int, help="Random seed (overrides the config)")
        p.add_argument("--log-file", help="JSON-lines log file")
        return p

    eq = with_config("eq-solve", "Solve the equilibrium measure")
    eq.add_argument("--csv", help="Density table path")

    ex = with_config("expand", "Fixed-filling free energy coefficients")
    ex.add_argument("--order", type=int, help="Highest order k_max")
    ex.add_argument("--refine", action="store_true", help="Double the s-quadrature until converged")

    th = sub.add_parser("theta-eval", help="Evaluate a Siegel theta function with characteristics")
    th.add_argument("--tau", required=True, help="g x g matrix as JSON, entries [re, im]")
    th.add_argument("--v", help="Argument as JSON list of [re, im]")
    th.add_argument("--mu", help="Characteristic mu as JSON list")
    th.add_argument("--nu", help="Characteristic nu as JSON list")
    th.add_argument("--out", help="JSON report path")
    th.add_argument("--log-file", help="JSON-lines log file")

    mc = with_config("multicut", "Multi-cut partition function expansion")
    mc.add_argument("--N", type=int, help="Number of particles (overrides the config)")
    mc.add_argument("--order", type=int, help="Highest order k_max")
    mc.add_argument("--csv", help="Theta-factor CSV path")
    mc.add_argument("--sweep", help="N range LO:HI for the CSV")

    se = sub.add_parser("selberg", help="Exact and asymptotic reference partition functions")
    se.add_argument("--signature", choices=SIGNATURES, required=True)
    se.add_argument("--N", type=int, required=True)
    se.add_argument("--beta", type=float, default=2.0)
    se.add_argument("--out", help="JSON report path")
    se.add_argument("--log-file", help="JSON-lines log file")

    sa = with_config("sample", "Metropolis sampling of the ensemble")
    sa.add_argument("--steps", type=lambda s: int(float(s)), help="Sweeps per chain (accepts 1e6)")

    op = with_config("opoly", "Orthogonal polynomial and Toda norm asymptotics (beta = 2)")
    op.add_argument("--n", type=int, required=True, help="Degree")
    op.add_argument("--s", type=float, default=1.0, help="Ratio s = n / N")
    op.add_argument("--x", type=float, required=True, help="Evaluation point outside the support")
    op.add_argument("--order", type=int, help="Highest order k_max (at most 1)")

    ve = sub.add_parser("verify", help="Run named acceptance suites")
    ve.add_argument("--suite", choices=sorted(SUITES) + ["all"], required=True)
    ve.add_argument("--quick", action="store_true", help="Reduced sizes")
    ve.add_argument("--seed", type=int, default=7)
    ve.add_argument("--out", help="JSON report path")
    ve.add_argument("--log-file", help="JSON-lines log file")
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, dispatch, and map failures to exit codes."""
    args = build_parser().parse_args(argv)
    logger = JSONLogger(component="cli", log_file=getattr(args, "log_file", None))
    try:
        result = COMMANDS[args.command](args)
    except LogGasError as e:
        logger.error(f"{args.command} failed: {e}", metadata=e.to_dict())
        return e.exit_code
    except (ValidationError, FileNotFoundError, ValueError, yaml.YAMLError) as e:
        logger.error(f"{args.command} rejected its input: {e}", metadata={"error": type(e).__name__})
        return EXIT_INVALID
    if args.command == "verify" and not result["passed"]:
        return EXIT_NUMERICAL
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
