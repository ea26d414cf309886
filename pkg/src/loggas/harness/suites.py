"""Named acceptance suites, each a list of pass/fail checks against an oracle.

``quick`` shrinks grids, sizes and chain lengths so a suite fits in a test
run; the full sizes are the ones the ``verify`` command uses by default.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from src.logging.json_logger import JSONLogger
from src.loggas.config import ExpansionConfig, SolverConfig
from src.loggas.equilibrium import solve_fixed_filling, solve_optimal
from src.loggas.errors import LogGasError, ParameterError
from src.loggas.freeenergy import free_energy_series
from src.loggas.harness.estimators import estimate_filling_histogram, estimate_linear_stat, expected_char_poly, total_variation
from src.loggas.harness.grid import grid_equilibrium
from src.loggas.harness.quadrature import monic_orthopoly, partition_quadrature, sum_decomposition
from src.loggas.harness.sampler import ChainConfig, sample
from src.loggas.multicut import expansion_context, filling_lattice, linear_stat_variance
from src.loggas.potential import AnalyticPotential, Domain
from src.loggas.selberg import SIGNATURES, selberg_asymptotic, selberg_exact
from src.loggas.theta import ThetaParams, quasi_period_factor, tau_derivative, theta, theta_grad

GAUSSIAN = AnalyticPotential.polynomial([0.0, 0.0, 0.5])
QUARTIC = AnalyticPotential.polynomial([0.0, 0.0, -2.0, 0.0, 0.25])
QUARTIC_DOMAIN = Domain.from_pairs([[-4.0, -0.05], [0.05, 4.0]])

# reference model of each signature on its natural domain (truncated where unbounded)
REFERENCE_MODELS = {
    "++": (GAUSSIAN, Domain.from_pairs([[-8.0, 8.0]])),
    "-+": (AnalyticPotential.polynomial([0.0, 1.0]), Domain.from_pairs([[0.0, 60.0]])),
    "+-": (AnalyticPotential.polynomial([0.0, -1.0]), Domain.from_pairs([[-60.0, 0.0]])),
    "--": (AnalyticPotential.polynomial([0.0]), Domain.from_pairs([[-2.0, 2.0]])),
}


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    target: float
    tolerance: float
    passed: bool
    detail: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "value": self.value,
            "target": self.target,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "detail": self.detail,
        }


@dataclass
class SuiteReport:
    name: str
    checks: List[Check] = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "suite": self.name,
            "passed": self.passed,
            "elapsed_seconds": round(self.elapsed, 3),
            "checks": [c.to_dict() for c in self.checks],
        }

    def table(self) -> str:
        width = max((len(c.name) for c in self.checks), default=10)
        lines = [f"{'check':<{width}}  {'value':>14}  {'target':>14}  {'tol':>8}  result"]
        for c in self.checks:
            mark = "PASS" if c.passed else "FAIL"
            lines.append(f"{c.name:<{width}}  {c.value:>14.8g}  {c.target:>14.8g}  {c.tolerance:>8.1e}  {mark}")
        lines.append(f"{self.name}: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def close(name: str, value: float, target: float, tol: float, relative: bool = False, detail: str = "") -> Check:
    scale = max(abs(target), 1e-300) if relative else 1.0
    ok = bool(math.isfinite(value) and abs(value - target) <= tol * scale)
    return Check(name, float(value), float(target), tol, ok, detail)


def below(name: str, value: float, bound: float, detail: str = "") -> Check:
    return Check(name, float(value), float(bound), float(bound), bool(math.isfinite(value) and value < bound), detail)


@dataclass(frozen=True)
class SuiteOptions:
    quick: bool = False
    seed: int = 7
    logger: Optional[JSONLogger] = None


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------


def selberg_small_n(opts: SuiteOptions) -> List[Check]:
    sizes = (1, 2) if opts.quick else (1, 2, 3)
    betas = (2.0,) if opts.quick else (1.0, 2.0, 4.0)
    checks = []
    for sig in SIGNATURES:
        p, d = REFERENCE_MODELS[sig]
        for beta in betas:
            for n in sizes:
                exact = float(selberg_exact(sig, n, beta))
                quad = partition_quadrature(p, d, n, beta)
                checks.append(close(f"Z[{sig}] N={n} beta={beta:g}", math.exp(quad - exact), 1.0, 1e-6))
    arcsine = partition_quadrature(*REFERENCE_MODELS["--"], 2, 2.0)
    checks.append(close("Z[--](2,2) = 128/3", math.exp(arcsine), 128.0 / 3.0, 1e-8, relative=True))
    for sig in SIGNATURES:
        asym = selberg_asymptotic(sig, 2.0)
        r50 = float(selberg_exact(sig, 50, 2.0)) - asym.predict(50.0, through_log=True)
        r100 = float(selberg_exact(sig, 100, 2.0)) - asym.predict(100.0, through_log=True)
        checks.append(below(f"asymptotic drift [{sig}] N=50..100", abs(r100 - r50), 1e-3))
    return checks


def reference_equilibria(opts: SuiteOptions) -> List[Check]:
    cases = [
        ("semicircle", GAUSSIAN, Domain.from_pairs([[-8.0, 8.0]]), (-2.0, 2.0),
         lambda x: np.sqrt(4.0 - x * x) / (2 * math.pi)),
        ("marchenko-pastur", AnalyticPotential.polynomial([0.0, 1.0]), Domain.from_pairs([[0.0, 40.0]]), (0.0, 4.0),
         lambda x: np.sqrt((4.0 - x) / x) / (2 * math.pi)),
        ("arcsine", AnalyticPotential.polynomial([0.0]), Domain.from_pairs([[-2.0, 2.0]]), (-2.0, 2.0),
         lambda x: 1.0 / (math.pi * np.sqrt(4.0 - x * x))),
    ]
    checks = []
    for name, p, d, edges, exact in cases:
        m = solve_fixed_filling(p, d, [1.0], logger=opts.logger)
        err = max(abs(m.edges[0] - edges[0]), abs(m.edges[1] - edges[1]))
        checks.append(below(f"{name} edges", err, 1e-8))
        xs = np.linspace(edges[0] + 0.1, edges[1] - 0.1, 25)
        checks.append(below(f"{name} density", float(np.max(np.abs(m.density(xs) - exact(xs)))), 1e-6))
    return checks


def theta_suite(opts: SuiteOptions) -> List[Check]:
    tau = np.array([[1.1j, 0.2 + 0.3j], [0.2 + 0.3j, 0.1 + 0.9j]])
    params = ThetaParams.build(tau, [0.1 + 0.05j, -0.2 + 0.1j], [0.25, 0.5], [0.1, 0.3])
    base = theta(params)
    checks = []
    for m0, n0 in (([1, 0], [0, 1]), ([0, -1], [1, 1])):
        shifted = params.replace(v=params.v + np.asarray(m0) + tau @ np.asarray(n0))
        lhs = theta(shifted)
        rhs = quasi_period_factor(params, m0, n0) * base
        checks.append(below(f"quasi-periodicity m={m0} n={n0}", abs(lhs - rhs) / abs(rhs), 1e-10))
    moved = theta(params.replace(mu=params.mu + np.array([1.0, -2.0])))
    checks.append(below("integer shift of mu", abs(moved - base) / abs(base), 1e-12))
    hess = theta_grad(params, 2)[2]
    for h, h2 in ((0, 0), (0, 1)):
        factor = 4j * math.pi if h == h2 else 2j * math.pi
        resid = abs(tau_derivative(params, h, h2) - hess[h, h2] / factor) / abs(base)
        checks.append(below(f"heat equation ({h},{h2})", resid, 1e-6))
    fine = theta(params, tol=1e-28)
    checks.append(below("truncation doubling", abs(fine - base) / abs(base), 1e-12))
    return checks


def two_cut_quartic(opts: SuiteOptions) -> List[Check]:
    m, eps = solve_optimal(QUARTIC, QUARTIC_DOMAIN, logger=opts.logger)
    checks = [
        below("edges", float(np.max(np.abs(np.array(m.edges) - np.array(
            [-math.sqrt(6), -math.sqrt(2), math.sqrt(2), math.sqrt(6)])))), 1e-8),
        close("eps*", float(eps[0]), 0.5, 1e-8),
    ]
    grid = grid_equilibrium(QUARTIC, QUARTIC_DOMAIN, None, nodes=250 if opts.quick else 600, logger=opts.logger)
    tol = 1e-2 if opts.quick else 1e-3
    for k in (1, 2, 3, 4):
        checks.append(close(f"moment {k} vs grid oracle", m.moment(k), grid.moment(k), tol))
    checks.append(close("energy vs grid oracle", m.energy(), grid.energy(), 10 * tol if opts.quick else 1e-4))
    if opts.quick:
        return checks
    ctx = expansion_context(QUARTIC, QUARTIC_DOMAIN, 2.0, 0, logger=opts.logger)
    grad = ctx.tensors[-2].derivatives[1]
    hess = ctx.tensors[-2].derivatives[2]
    checks.append(below("|(F^-2)'| at eps*", float(np.max(np.abs(grad))), 1e-6))
    checks.append(below("max eigenvalue of (F^-2)''", float(np.max(np.linalg.eigvalsh(hess))), 0.0))
    checks.append(below("|Re tau*|", float(np.max(np.abs(ctx.tau.real))), 1e-6))
    checks.append(Check("Im tau* > 0", float(np.min(np.linalg.eigvalsh(ctx.tau.imag))), 0.0, 0.0,
                        bool(np.min(np.linalg.eigvalsh(ctx.tau.imag)) > 0)))
    return checks


def beta2_structure(opts: SuiteOptions) -> List[Check]:
    cases = [("gaussian", GAUSSIAN, Domain.from_pairs([[-8.0, 8.0]]), [1.0])]
    if not opts.quick:
        cases.append(("two-cut quartic", QUARTIC, QUARTIC_DOMAIN, [0.5, 0.5]))
    checks = []
    for name, p, d, eps in cases:
        series = free_energy_series(p, d, eps, 1, 2.0, ExpansionConfig(k_max=1), logger=opts.logger)
        norm = series.normalized()
        checks.append(below(f"{name} F^-1 (normalized)", abs(norm[-1]), 1e-6))
        checks.append(below(f"{name} F^1 (normalized)", abs(norm[1]), 1e-6))
    return checks


def sum_decomposition_suite(opts: SuiteOptions) -> List[Check]:
    lhs, rhs = sum_decomposition(QUARTIC, QUARTIC_DOMAIN, 2 if opts.quick else 3, 2.0)
    return [below("sum over fillings vs free quadrature", abs(lhs - rhs), 1e-8)]


def heine(opts: SuiteOptions) -> List[Check]:
    d = Domain.from_pairs([[-8.0, 8.0]])
    n = 6
    steps = 4000 if opts.quick else 200000
    cfg = ChainConfig(N=n, beta=2.0, steps=steps, burn_in=steps // 10, step_size=0.3, seed=opts.seed, chains=4, thin=5)
    batch = sample(GAUSSIAN, d, cfg, opts.logger)
    tol = 0.2 if opts.quick else 0.05
    checks = []
    for x in (2.5, 3.0, 4.0):
        est = expected_char_poly(batch, x)
        exact = monic_orthopoly(GAUSSIAN, d, n, x).real
        checks.append(close(f"E prod(x - l) at x={x}", est.real, exact, tol, relative=True, detail=f"stderr={est.stderr:.3g}"))
    return checks


def fluctuations(opts: SuiteOptions) -> List[Check]:
    n = 20 if opts.quick else 40
    steps = 3000 if opts.quick else 1000000
    chains = 2 if opts.quick else 8
    ctx = expansion_context(QUARTIC, QUARTIC_DOMAIN, 2.0, 0, logger=opts.logger)
    report = ctx.report(n)
    free = sample(QUARTIC, QUARTIC_DOMAIN, ChainConfig(n, 2.0, steps, steps // 10, 0.2, opts.seed, chains, 10), opts.logger)
    hist = {k: e.real for k, e in estimate_filling_histogram(free).items()}
    pts, prob = filling_lattice(report)
    model = {tuple(int(v) for v in row): float(w) for row, w in zip(pts, prob)}
    checks = [below("filling law total variation", total_variation(hist, model), 0.1,
                    detail=f"crossings={free.crossings.tolist()}")]
    mode = max(hist, key=lambda k: hist[k])
    checks.append(close("histogram mode", float(mode[0]), n / 2.0, 0.0))
    half = (n // 2, n - n // 2)
    fixed = sample(QUARTIC, QUARTIC_DOMAIN,
                   ChainConfig(n, 2.0, steps, steps // 10, 0.2, opts.seed + 1, chains, 10, fixed_filling=half), opts.logger)
    mc_var = estimate_linear_stat(fixed, lambda x: x)["variance"].real
    q = linear_stat_variance(report, lambda z: z, fixed_filling=True)
    checks.append(close("fixed-filling variance of sum x", mc_var, q, 0.1, relative=True))
    factors = [ctx.report(k).z_ratio_series[0].real for k in range(10, 61)]
    pattern = all((factors[i] > factors[i + 1]) == ((10 + i) % 2 == 0) for i in range(len(factors) - 1))
    checks.append(Check("theta factor parity pattern", float(pattern), 1.0, 0.0, pattern))
    return checks


SUITES: Dict[str, Callable[[SuiteOptions], List[Check]]] = {
    "selberg-small-N": selberg_small_n,
    "reference-equilibria": reference_equilibria,
    "theta": theta_suite,
    "two-cut-quartic": two_cut_quartic,
    "beta2-structure": beta2_structure,
    "sum-decomposition": sum_decomposition_suite,
    "heine": heine,
    "fluctuations": fluctuations,
}


def run_suite(name: str, quick: bool = False, seed: int = 7, logger: Optional[JSONLogger] = None) -> SuiteReport:
    """Run one named suite; a library failure inside it becomes a failed check."""
    if name not in SUITES:
        raise ParameterError(f"Unknown suite {name!r}", available=sorted(SUITES))
    start = time.monotonic()
    report = SuiteReport(name)
    try:
        report.checks = SUITES[name](SuiteOptions(quick, seed, logger))
    except LogGasError as exc:
        report.checks.append(Check("suite raised", float("nan"), 0.0, 0.0, False, f"{type(exc).__name__}: {exc}"))
    report.elapsed = time.monotonic() - start
    if logger is not None:
        level = logger.info if report.passed else logger.warn
        level("suite finished", {"suite": name, "passed": report.passed, "elapsed": report.elapsed})
    return report
