"""Multi-cut assembly: partition function, filling law, fluctuations, kernels.

Summing the fixed-filling model over fillings P = N eps + X turns the Taylor
expansion of F-tilde around eps* into a Siegel theta function

    Z_N = N^{(beta/2) N + e - g/2} exp(sum_k N^{-k} F~^{k}(eps*)) sum_k N^{-k} T^{k}[grad_v / 2 i pi] theta[-N eps*; 0](v* | tau*)

with tau* = (F^{-2})'' / 2 i pi and v* = (F~^{-1})' / 2 i pi. Everything
N-independent lives in :class:`ExpansionContext`; :class:`ExpansionReport`
is the context evaluated at one N.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import numpy.typing as npt

from src.logging.json_logger import JSONLogger
from src.loggas.config import ExpansionConfig, SolverConfig
from src.loggas.curve import Contour, HolomorphicBasis, SpectralCurve, build_curve, holomorphic_basis, period_matrix
from src.loggas.equilibrium import EquilibriumMeasure, solve_fixed_filling, solve_optimal
from src.loggas.errors import ContourError, HomotopyError, ParameterError
from src.loggas.freeenergy import FreeEnergySeries, FreeEnergyTensor, eps_derivative_tensors, free_energy_series
from src.loggas.potential import AnalyticPotential, Domain
from src.loggas.recursion import RecursionEngine, leading_order
from src.loggas.theta import ThetaParams, apply_T_operator, reduce_characteristic, theta, theta_grad

ComplexArray = npt.NDArray[np.complex128]
FloatArray = npt.NDArray[np.float64]
Observable = Union[AnalyticPotential, Callable[[ComplexArray], ComplexArray]]

KERNEL_NODES = 64
LAW_RADIUS = 10.0


# ---------------------------------------------------------------------------
# N-independent context
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class ExpansionContext:
    """Optimal fillings, free-energy tensors and theta data of one potential."""

    potential: AnalyticPotential
    domain: Domain
    beta: float
    k_max: int
    measure: EquilibriumMeasure
    eps_star: FloatArray
    series: FreeEnergySeries
    tensors: Dict[int, FreeEnergyTensor]
    tau: ComplexArray
    v: ComplexArray
    notes: List[str] = field(default_factory=list)
    contour_nodes: int = 192

    @property
    def genus(self) -> int:
        return self.measure.genus

    @cached_property
    def curve(self) -> SpectralCurve:
        return build_curve(self.measure)

    @cached_property
    def basis(self) -> HolomorphicBasis:
        return holomorphic_basis(self.curve)

    def engine(self, targets: Sequence[Tuple[int, int]], nodes: Optional[int] = None) -> RecursionEngine:
        key = (tuple(sorted(targets)), nodes)
        cache: Dict[Any, RecursionEngine] = self.__dict__.setdefault("_engines", {})
        if key not in cache:
            cache[key] = RecursionEngine(
                leading_order(self.measure, self.curve, self.basis), self.beta, targets, nodes or self.contour_nodes
            )
        return cache[key]

    def theta_params(self, n_particles: int, shift: Optional[npt.ArrayLike] = None) -> ThetaParams:
        mu = reduce_characteristic(-n_particles * self.eps_star[1:])
        v = self.v if shift is None else self.v + np.asarray(shift, dtype=np.complex128)
        return ThetaParams.build(self.tau, v, mu)

    def report(self, n_particles: int, k_max: Optional[int] = None) -> "ExpansionReport":
        """Evaluate the expansion at N = ``n_particles``."""
        if n_particles < 1:
            raise ParameterError("N must be >= 1", N=n_particles)
        order = self.k_max if k_max is None else k_max
        if order > self.k_max:
            raise ParameterError("Requested order exceeds the computed tensors", order=order, k_max=self.k_max)
        g = self.genus
        if g == 0:
            block = [1.0 + 0.0j] + [0.0j] * order
            mu = np.zeros(0)
        else:
            params = self.theta_params(n_particles)
            block = apply_T_operator([self.tensors[k] for k in sorted(self.tensors)], params, order)
            mu = params.mu
        running: List[complex] = []
        acc = 0.0j
        for k, t in enumerate(block):
            acc += t * float(n_particles) ** (-k)
            running.append(acc)
        coeffs = self.series.with_multinomial()
        return ExpansionReport(
            N=n_particles,
            beta=self.beta,
            k_max=order,
            eps_star=self.eps_star,
            genus=g,
            coefficients={k: v for k, v in coeffs.items() if k <= order},
            tensors=self.tensors,
            v_star=self.v,
            tau_star=self.tau,
            mu=np.asarray(mu, dtype=float),
            theta_block=[complex(b) for b in block],
            z_ratio_series=running,
            nlogn=self.series.nlogn,
            log_exponent=self.series.log_exponent - 0.5 * g,
            log_multinomial=_log_multinomial(n_particles, self.eps_star),
            notes=list(self.notes),
            context=self,
        )


def _log_multinomial(n: int, eps: FloatArray) -> float:
    """log N! / prod Gamma(N eps_h + 1), continued to non-integer N eps_h."""
    return math.lgamma(n + 1.0) - float(sum(math.lgamma(n * e + 1.0) for e in eps))


def expansion_context(
    p: AnalyticPotential,
    d: Domain,
    beta: float,
    k_max: int,
    expansion: Optional[ExpansionConfig] = None,
    solver: Optional[SolverConfig] = None,
    logger: Optional[JSONLogger] = None,
) -> ExpansionContext:
    """Solve for eps*, then build the free-energy tensors the T operators need up to ``k_max``."""
    exp_cfg = expansion or ExpansionConfig()
    solver_cfg = solver or SolverConfig()
    m, eps_star = solve_optimal(p, d, solver_cfg, logger)
    g = m.genus
    quiet = solver_cfg.model_copy(update={"margin_threshold": 0.0})
    cache: Dict[Tuple[float, ...], FreeEnergySeries] = {}

    def builder(eps: FloatArray) -> FreeEnergySeries:
        key = tuple(np.round(eps, 14))
        if key not in cache:
            mm = m if np.allclose(eps, eps_star, atol=1e-14) else solve_fixed_filling(
                p, d, eps, cut_hint=m.cuts, config=quiet
            )
            cache[key] = free_energy_series(p, d, eps, k_max, beta, exp_cfg, quiet, measure=mm, logger=logger)
        return cache[key]

    center = builder(eps_star)
    notes: List[str] = []
    if g == 0:
        tensors = {k: FreeEnergyTensor(k, v) for k, v in center.coefficients.items()}
        tau = np.zeros((0, 0), dtype=np.complex128)
        v = np.zeros(0, dtype=np.complex128)
    else:
        orders = {m_: k_max - m_ for m_ in range(-2, k_max) if k_max - m_ >= 1}
        orders[-2] = max(orders.get(-2, 0), 2)
        orders[-1] = max(orders.get(-1, 0), 1)
        tensors = eps_derivative_tensors(builder, eps_star, orders, exp_cfg.eps_step, logger=logger)
        for k, val in center.with_multinomial().items():
            if k not in tensors:
                tensors[k] = FreeEnergyTensor(k, val)
        grad = tensors[-2].derivatives[1]
        if float(np.max(np.abs(grad))) > 1e-6:
            notes.append(f"(F^-2)' at eps* is {np.max(np.abs(grad)):.3e}, above 1e-6")
        curve = build_curve(m)
        tau = period_matrix(curve, holomorphic_basis(curve), tensors[-2].derivatives[2])
        v = np.asarray(tensors[-1].derivatives[1], dtype=np.complex128) / (2j * math.pi)
        if float(np.max(np.abs(v))) < 1e-8:
            notes.append("v* vanishes: the theta factor is a Thetanullwert and oscillates with the parity of N eps*")
    ctx = ExpansionContext(p, d, beta, k_max, m, eps_star, center, tensors, tau, v, notes, exp_cfg.contour_nodes)
    if logger is not None:
        logger.info(
            "expansion context",
            {"genus": g, "eps_star": eps_star.tolist(), "tau": np.asarray(tau).tolist(), "notes": notes},
        )
    return ctx


# ---------------------------------------------------------------------------
# Report
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class ExpansionReport:
    """Large-N expansion of log Z_N at one N."""

    N: int
    beta: float
    k_max: int
    eps_star: FloatArray
    genus: int
    coefficients: Dict[int, float]
    tensors: Dict[int, FreeEnergyTensor]
    v_star: ComplexArray
    tau_star: ComplexArray
    mu: FloatArray
    theta_block: List[complex]
    z_ratio_series: List[complex]
    nlogn: float
    log_exponent: float
    log_multinomial: float
    notes: List[str]
    context: ExpansionContext

    def fixed_filling_log(self) -> float:
        """Log of the eps* factor: N-power and sum of N^{-k} F~^{k}."""
        n = float(self.N)
        val = self.nlogn * n * math.log(n) + self.log_exponent * math.log(n)
        for k, f in self.coefficients.items():
            val += f * n ** (-k)
        return val

    def log_partition(self) -> float:
        """log Z_N predicted through order N^{-k_max}."""
        theta_factor = self.z_ratio_series[-1]
        return self.fixed_filling_log() + math.log(abs(theta_factor))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "N": self.N,
            "beta": self.beta,
            "k_max": self.k_max,
            "genus": self.genus,
            "eps_star": self.eps_star.tolist(),
            "F": {str(k): v for k, v in sorted(self.coefficients.items())},
            "F_fixed_filling": {str(k): v for k, v in sorted(self.context.series.coefficients.items())},
            "F_normalized": {str(k): v for k, v in sorted(self.context.series.normalized().items())},
            "tensors": [t.to_dict() for _, t in sorted(self.tensors.items())],
            "v_star": _complex_list(self.v_star),
            "tau_star": [_complex_list(row) for row in np.asarray(self.tau_star)],
            "mu": self.mu.tolist(),
            "theta_block": _complex_list(self.theta_block),
            "Z_ratio_series": _complex_list(self.z_ratio_series),
            "prefactor": {
                "NlogN": self.nlogn,
                "logN": self.log_exponent,
                "log_multinomial": self.log_multinomial,
            },
            "energy_route": self.context.series.energy_route,
            "interpolation_route": self.context.series.interpolation_route,
            "log_partition": self.log_partition(),
            "notes": self.notes,
        }


def _complex_list(values: Any) -> List[List[float]]:
    return [[float(np.real(z)), float(np.imag(z))] for z in np.asarray(values, dtype=np.complex128).ravel()]


def partition_expansion(
    p: AnalyticPotential,
    d: Domain,
    beta: float,
    n_particles: int,
    k_max: int,
    expansion: Optional[ExpansionConfig] = None,
    solver: Optional[SolverConfig] = None,
    logger: Optional[JSONLogger] = None,
) -> ExpansionReport:
    return expansion_context(p, d, beta, k_max, expansion, solver, logger).report(n_particles)


# ---------------------------------------------------------------------------
# Filling fractions
# ---------------------------------------------------------------------------


def _fill_vector(report: ExpansionReport, filling: Sequence[int]) -> FloatArray:
    g = report.genus
    arr = np.asarray(filling, dtype=float)
    if arr.size == g + 1:
        if int(round(arr.sum())) != report.N:
            raise ParameterError("Fillings must sum to N", N=report.N, filling=arr.tolist())
        arr = arr[1:]
    if arr.size != g:
        raise ParameterError(f"Expected {g} or {g + 1} fillings", filling=arr.tolist())
    return arr


def _law_weights(report: ExpansionReport, x: FloatArray) -> FloatArray:
    hess = report.tensors[-2].derivatives[2]
    grad = report.tensors[-1].derivatives[1]
    quad = 0.5 * np.einsum("...i,ij,...j->...", x, hess, x)
    return np.asarray(np.exp(quad + x @ grad), dtype=float)


def filling_law(report: ExpansionReport, filling: Sequence[int]) -> float:
    """Probability of the fillings (N_1..N_g, optionally with N_0 first) under the discrete Gaussian limit law."""
    if report.genus == 0:
        return 1.0
    x = _fill_vector(report, filling) - report.N * report.eps_star[1:]
    norm = theta(report.context.theta_params(report.N)).real
    return float(_law_weights(report, x[None, :])[0] / norm)


def filling_covariance_limit(report: ExpansionReport) -> FloatArray:
    """[(-F^{-2})'']^{-1}, the covariance of the continuous Gaussian envelope."""
    return np.asarray(np.linalg.inv(-report.tensors[-2].derivatives[2]), dtype=float)


def filling_lattice(report: ExpansionReport, radius: float = LAW_RADIUS) -> Tuple[npt.NDArray[np.int64], FloatArray]:
    """Lattice points (N_1..N_g) within ``radius`` standard deviations, with their probabilities."""
    g = report.genus
    if g == 0:
        return np.zeros((1, 0), dtype=np.int64), np.ones(1)
    cov = filling_covariance_limit(report)
    centre = report.N * report.eps_star[1:]
    spans = []
    for h in range(g):
        width = radius * math.sqrt(cov[h, h]) + 1.0
        lo = max(0, int(math.floor(centre[h] - width)))
        hi = min(report.N, int(math.ceil(centre[h] + width)))
        spans.append(range(lo, hi + 1))
    pts = np.array(list(itertools.product(*spans)), dtype=np.int64)
    pts = pts[pts.sum(axis=1) <= report.N]
    w = _law_weights(report, pts - centre)
    norm = theta(report.context.theta_params(report.N)).real
    return pts, np.asarray(w / norm, dtype=float)


def filling_mean(report: ExpansionReport) -> FloatArray:
    pts, prob = filling_lattice(report)
    return np.asarray(prob @ pts / prob.sum(), dtype=float)


def filling_covariance(report: ExpansionReport) -> FloatArray:
    pts, prob = filling_lattice(report)
    prob = prob / prob.sum()
    mean = prob @ pts
    centred = pts - mean
    return np.asarray(np.einsum("a,ai,aj->ij", prob, centred, centred), dtype=float)


# ---------------------------------------------------------------------------
# Linear statistics
# ---------------------------------------------------------------------------


def _observable(phi: Observable) -> Tuple[Callable[[ComplexArray], ComplexArray], List[complex]]:
    if isinstance(phi, AnalyticPotential):
        pot = phi
        return (lambda z: pot.value(z)), pot.singular_points()
    return phi, []


def _check_singularities(curve: SpectralCurve, contour: Contour, points: Sequence[complex]) -> None:
    for z in points:
        if curve.min_eta(np.array([z])) <= 1.05 * contour.eta:
            raise ContourError("Observable singularity is not separated from the cuts by the contour", point=str(z))


@dataclass(frozen=True)
class LinearStatData:
    """Ingredients of the characteristic function of sum phi(lambda_i) - N int phi dmu."""

    mean_shift: float
    variance: float
    u: FloatArray


def linear_stat_data(report: ExpansionReport, phi: Observable) -> LinearStatData:
    ctx = report.context
    f, sing = _observable(phi)
    engine = ctx.engine([(1, 0)])
    outer, inner = engine.contours(2)
    _check_singularities(ctx.curve, outer, sing)
    f_out = f(outer.nodes)
    w1 = engine.evaluate_grid(1, 0, outer.nodes, np.zeros((1, 0)))[:, 0]
    mean_shift = float(np.real(outer.integrate(f_out * w1)))
    w2 = engine.two_point.value(outer.nodes[:, None], inner.nodes[None, :])
    variance = float(np.real((outer.weights * f_out) @ w2 @ (inner.weights * f(inner.nodes))))
    g = ctx.genus
    u = np.zeros(g)
    if g:
        forms = ctx.basis.forms(ctx.curve, outer.nodes)
        u = np.real(np.array([outer.integrate(f_out * forms[h]) for h in range(g)])) / (2 * math.pi)
    return LinearStatData(mean_shift, variance, np.asarray(u, dtype=float))


def linear_stat_cf(report: ExpansionReport, phi: Observable, s: float) -> complex:
    """E exp(i s (sum phi - N int phi dmu*)) at leading order."""
    data = linear_stat_data(report, phi)
    val = complex(np.exp(1j * s * data.mean_shift - 0.5 * s * s * data.variance))
    if report.genus == 0 or s == 0.0:
        return val
    params = report.context.theta_params(report.N)
    shifted = report.context.theta_params(report.N, s * data.u)
    return val * theta(shifted) / theta(params)


def linear_stat_mean(report: ExpansionReport, phi: Observable) -> float:
    """Order-one mean of sum phi - N int phi dmu*: fixed-filling shift plus the theta-gradient term."""
    data = linear_stat_data(report, phi)
    if report.genus == 0:
        return data.mean_shift
    params = report.context.theta_params(report.N)
    grads = theta_grad(params, 1)
    corr = complex(data.u @ grads[1] / grads[0]) / 1j
    return data.mean_shift + float(np.real(corr))


def linear_stat_variance(report: ExpansionReport, phi: Observable, fixed_filling: bool = False) -> float:
    """Q*[phi, phi], plus the filling-fluctuation part unless ``fixed_filling``."""
    data = linear_stat_data(report, phi)
    if report.genus == 0 or fixed_filling:
        return data.variance
    params = report.context.theta_params(report.N)
    grads = theta_grad(params, 2)
    th = grads[0]
    first = complex(data.u @ grads[1]) / th
    second = complex(data.u @ grads[2] @ data.u) / th
    return data.variance - float(np.real(second - first ** 2))


# ---------------------------------------------------------------------------
# Kernels and orthogonal polynomials
# ---------------------------------------------------------------------------


def _log_kernel(x: complex) -> Callable[[ComplexArray], ComplexArray]:
    """xi -> log(x - xi) with its cut on the vertical ray from x away from the real axis."""
    theta_dir = math.pi / 2 if x.imag >= 0 else -math.pi / 2
    rot = complex(math.cos(theta_dir), -math.sin(theta_dir))

    def f(xi: ComplexArray) -> ComplexArray:
        return np.asarray(np.log((x - xi) * rot) + 1j * theta_dir, dtype=np.complex128)

    return f


@dataclass(frozen=True)
class KernelExpansion:
    """log E prod_i prod_j (x_j - lambda_i)^{c_j} = sum_k N^{-k} log_terms[k], times a theta ratio."""

    N: int
    points: Tuple[complex, ...]
    charges: Tuple[complex, ...]
    log_terms: Dict[int, complex]
    theta_ratio: complex
    multivalued: bool

    @property
    def value(self) -> complex:
        log_val = sum(t * float(self.N) ** (-k) for k, t in self.log_terms.items())
        return complex(np.exp(log_val)) * self.theta_ratio

    def to_dict(self) -> Dict[str, Any]:
        return {
            "N": self.N,
            "points": _complex_list(self.points),
            "charges": _complex_list(self.charges),
            "log_terms": {str(k): [v.real, v.imag] for k, v in sorted(self.log_terms.items())},
            "theta_ratio": [self.theta_ratio.real, self.theta_ratio.imag],
            "value": [self.value.real, self.value.imag],
            "multivalued": self.multivalued,
        }


def kernel_expansion(
    report: ExpansionReport,
    points: Sequence[complex],
    charges: Sequence[complex],
    k_max: int = 1,
    nodes: int = KERNEL_NODES,
) -> KernelExpansion:
    """Expectation of prod_j prod_i (x_j - lambda_i)^{c_j} through order N^{-k_max}.

    Raises:
        ParameterError: points and charges differ in length, or k_max > 1.
        HomotopyError: a point is not separated from the cuts by the integration contours.
    """
    if len(points) != len(charges):
        raise ParameterError("points and charges must have the same length")
    if not 0 <= k_max <= 1:
        raise ParameterError(
            f"kernel_expansion is limited to k_max <= 1, got {k_max}; "
            "order N^-2 would need the four-fold contour integral of W_4^2",
            k_max=k_max,
        )
    ctx = report.context
    targets = [(n, k) for k in range(0, k_max + 1) for n in range(1, k + 3)]
    engine = ctx.engine(targets)
    max_n = k_max + 2
    contours = engine.contours(max_n, nodes)
    xs = [complex(x) for x in points]
    cs = [complex(c) for c in charges]
    for x in xs:
        if ctx.curve.min_eta(np.array([x])) <= 1.05 * contours[0].eta:
            raise HomotopyError("Kernel point too close to the cuts for the ray paths", point=str(x))

    def f_on(c: Contour) -> ComplexArray:
        out = np.zeros(len(c), dtype=np.complex128)
        for x, ch in zip(xs, cs):
            out = out + ch * _log_kernel(x)(c.nodes)
        return out

    wf = [c.weights * f_on(c) for c in contours]

    def cumulant(n: int, k: int) -> complex:
        first = contours[0].nodes
        if n == 1:
            vals = engine.evaluate_grid(1, k, first, np.zeros((1, 0)))[:, 0]
            return complex(wf[0] @ vals)
        grids = np.meshgrid(*[contours[i].nodes for i in range(1, n)], indexing="ij")
        others = np.stack([gr.ravel() for gr in grids], axis=1)
        weights = np.ones(1, dtype=np.complex128)
        for i in range(1, n):
            weights = np.multiply.outer(weights, wf[i]).ravel()
        vals = engine.evaluate_grid(n, k, first, others)
        return complex(wf[0] @ vals @ weights)

    log_terms: Dict[int, complex] = {-1: cumulant(1, -1)}
    for k in range(0, k_max + 1):
        log_terms[k] = sum((cumulant(n, k) / math.factorial(n) for n in range(1, k + 3)), 0.0j)
    ratio = 1.0 + 0.0j
    if ctx.genus:
        forms = ctx.basis.forms(ctx.curve, contours[0].nodes)
        abel = np.array([complex(wf[0] @ forms[h]) for h in range(ctx.genus)])
        shift = abel / (2j * math.pi)
        ratio = theta(ctx.theta_params(report.N, shift)) / theta(ctx.theta_params(report.N))
    multivalued = any(abs(c - round(c.real)) > 1e-12 for c in cs)
    return KernelExpansion(report.N, tuple(xs), tuple(cs), log_terms, complex(ratio), multivalued)


def orthopoly_asymptotics(
    p: AnalyticPotential,
    d: Domain,
    s_ratio: float,
    n: int,
    x: complex,
    k_max: int = 1,
    expansion: Optional[ExpansionConfig] = None,
    solver: Optional[SolverConfig] = None,
    logger: Optional[JSONLogger] = None,
) -> complex:
    """Monic orthogonal polynomial of degree n for the weight exp(-(n/s) V) at x (Heine, beta = 2)."""
    if s_ratio <= 0:
        raise ParameterError("s must be positive", s=s_ratio)
    ctx = expansion_context(p.scaled(1.0 / s_ratio), d, 2.0, k_max, expansion, solver, logger)
    return kernel_expansion(ctx.report(n), [x], [1.0], k_max).value


@dataclass(frozen=True)
class NormExpansion:
    """u_n = log h_n = log Z_{n+1}[V/(s(1 + 1/n))] - log Z_n[V/s] - log(n + 1)."""

    n: int
    s_ratio: float
    log_z_next: float
    log_z: float

    @property
    def value(self) -> float:
        return self.log_z_next - self.log_z - math.log(self.n + 1.0)

    def to_dict(self) -> Dict[str, Any]:
        return {"n": self.n, "s": self.s_ratio, "log_z_next": self.log_z_next, "log_z": self.log_z, "u_n": self.value}


def toda_norm_expansion(
    p: AnalyticPotential,
    d: Domain,
    s_ratio: float,
    n: int,
    k_max: int = 1,
    expansion: Optional[ExpansionConfig] = None,
    solver: Optional[SolverConfig] = None,
    logger: Optional[JSONLogger] = None,
) -> NormExpansion:
    """Log of the n-th squared norm of the monic orthogonal polynomials for exp(-(n/s) V), beta = 2."""
    if n < 1 or s_ratio <= 0:
        raise ParameterError("toda_norm_expansion needs n >= 1 and s > 0", n=n, s=s_ratio)
    here = expansion_context(p.scaled(1.0 / s_ratio), d, 2.0, k_max, expansion, solver, logger)
    nxt = expansion_context(p.scaled(1.0 / (s_ratio * (1.0 + 1.0 / n))), d, 2.0, k_max, expansion, solver, logger)
    return NormExpansion(n, s_ratio, nxt.report(n + 1).log_partition(), here.report(n).log_partition())


def theta_oscillation_csv(ctx: ExpansionContext, sizes: Sequence[int], path: Union[str, Path]) -> Path:
    """Write ``N,theta_factor_re,theta_factor_im,parity`` over a sweep of N."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["N", "theta_factor_re", "theta_factor_im", "parity"])
        for n in sizes:
            factor = ctx.report(int(n)).z_ratio_series[-1]
            writer.writerow([int(n), f"{factor.real:.12g}", f"{factor.imag:.12g}", int(n) % 2])
    return out
