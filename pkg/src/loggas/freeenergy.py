"""Free-energy coefficients F^{k} of the fixed-filling model.

    log Z_{N, eps} = (beta/2) N log N + e log N + sum_{k >= -2} N^{-k} F^{k}

The coefficients come from interpolating V_s = (1 - s) V + s V_ref towards a
reference potential whose equilibrium measure has the same cuts and the same
edge types:

    F^{k}(V) = F^{k}(V_ref) - int_0^1 ds  -(beta/2) sum_j  oint dV^{j} W_1^{k+1-j; s}

with dV^{0} = V_ref - V^{0} and dV^{j} = -V^{j}. Near cut h the reference
potential is eps_h times the one-cut reference model of that cut plus the
logarithmic potentials 2 eps_h' U_h' of the other cuts. Its partition
function follows from the Selberg asymptotics once every cut is shrunk to a
point (t -> 0), plus a flow integral in t.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt

from src.logging.json_logger import JSONLogger
from src.loggas.config import ExpansionConfig, SolverConfig
from src.loggas.curve import EdgeType, SpectralCurve, build_curve, holomorphic_basis
from src.loggas.equilibrium import EquilibriumMeasure, free_energy_gradient, solve_fixed_filling
from src.loggas.errors import InterpolationError, NumericalFailure, ParameterError
from src.loggas.potential import AnalyticPotential, Domain
from src.loggas.recursion import LeadingOrder, RecursionEngine, leading_order
from src.loggas.selberg import (
    ReferenceModel,
    prefactor_exponent,
    reference_log_partition_series,
    stirling_tail,
)

ComplexArray = npt.NDArray[np.complex128]
FloatArray = npt.NDArray[np.float64]

STENCIL_RETRIES = 2


# ---------------------------------------------------------------------------
# Reference mixture
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ReferenceMixture:
    """One reference model per cut, weighted by the fillings."""

    models: Tuple[ReferenceModel, ...]
    eps: FloatArray
    forbidden: Tuple[complex, ...] = ()

    @classmethod
    def from_measure(cls, m: EquilibriumMeasure) -> "ReferenceMixture":
        models = tuple(ReferenceModel(c.signature, c.lo, c.hi) for c in m.cuts)
        return cls(models, np.asarray(m.filling, dtype=float), tuple(m.potential.singular_points()))

    @property
    def genus(self) -> int:
        return len(self.models) - 1

    def shrunk(self, t: float) -> "ReferenceMixture":
        return ReferenceMixture(tuple(r.shrunk(t) for r in self.models), self.eps, self.forbidden)

    def curve(self, cut_nodes: int = 256) -> SpectralCurve:
        edges: List[float] = []
        types: List[EdgeType] = []
        for r in self.models:
            edges += [r.lo, r.hi]
            types += [EdgeType.SOFT if r.signature[0] == "+" else EdgeType.HARD,
                      EdgeType.SOFT if r.signature[1] == "+" else EdgeType.HARD]
        return SpectralCurve(tuple(edges), tuple(types), cut_nodes, self.forbidden)

    def _owner(self, z: ComplexArray) -> npt.NDArray[np.int64]:
        radii = []
        for r in self.models:
            w = (z - r.mid) / (2.0 * r.delta)
            radii.append(np.abs(np.real(np.arccosh(w))))
        return np.asarray(np.argmin(np.stack(radii), axis=0), dtype=np.int64)

    def w(self, z: ComplexArray) -> ComplexArray:
        return np.asarray(sum(e * r.w_minus1(z) for e, r in zip(self.eps, self.models)), dtype=np.complex128)

    def dw(self, z: ComplexArray) -> ComplexArray:
        return np.asarray(sum(e * r.w_minus1_prime(z) for e, r in zip(self.eps, self.models)), dtype=np.complex128)

    def two_y(self, z: ComplexArray) -> ComplexArray:
        z = np.asarray(z, dtype=np.complex128)
        owner = self._owner(z)
        out = np.zeros_like(z)
        for h, (e, r) in enumerate(zip(self.eps, self.models)):
            mask = owner == h
            out[mask] = 2.0 * e * r.y(z[mask])
        return out

    def potential(self, z: ComplexArray) -> ComplexArray:
        """V_ref near each cut."""
        z = np.asarray(z, dtype=np.complex128)
        owner = self._owner(z)
        out = np.zeros_like(z)
        for h, (e, r) in enumerate(zip(self.eps, self.models)):
            mask = owner == h
            zh = z[mask]
            val = e * r.potential().value(zh)
            for h2, (e2, r2) in enumerate(zip(self.eps, self.models)):
                if h2 != h:
                    val = val + 2.0 * e2 * r2.log_potential(zh)
            out[mask] = val
        return out

    def shrink_rate(self, z: ComplexArray) -> ComplexArray:
        """d/dt' at t' = 1 of the mixture potential shrunk by t'."""
        z = np.asarray(z, dtype=np.complex128)
        owner = self._owner(z)
        out = np.zeros_like(z)
        for h, (e, r) in enumerate(zip(self.eps, self.models)):
            mask = owner == h
            zh = z[mask]
            val = e * r.potential_shrink_rate(zh)
            for h2, (e2, r2) in enumerate(zip(self.eps, self.models)):
                if h2 != h:
                    val = val + 2.0 * e2 * r2.log_potential_shrink_rate(zh)
            out[mask] = val
        return out

    def leading(self, curve: SpectralCurve) -> LeadingOrder:
        return LeadingOrder(curve, holomorphic_basis(curve), self.w, self.dw, self.two_y, {})

    def decoupled_series(self, beta: float, k_max: int) -> Dict[int, float]:
        """log Z of the cuts shrunk to their anchors: independent Selberg factors and the pair interaction."""
        out: Dict[int, float] = {k: 0.0 for k in range(-2, k_max + 1)}
        for e, r in zip(self.eps, self.models):
            for k, v in reference_log_partition_series(r, beta, float(e), k_max).items():
                out[k] += v
        for (h, r), (h2, r2) in itertools.combinations(enumerate(self.models), 2):
            out[-2] -= beta * self.eps[h] * self.eps[h2] * math.log(abs(r.anchor - r2.anchor))
        return out

    def log_exponent(self, beta: float) -> float:
        return float(sum(prefactor_exponent(r.signature, beta) for r in self.models))


# ---------------------------------------------------------------------------
# Series container
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FreeEnergyTensor:
    """F^{k} and its derivative tensors in eps_1..eps_g (eps_0 = 1 - sum)."""

    k: int
    value: float
    derivatives: Dict[int, npt.NDArray[np.float64]] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "k": self.k,
            "value": self.value,
            "derivatives": {str(j): np.asarray(t).tolist() for j, t in sorted(self.derivatives.items())},
        }


@dataclass(frozen=True, eq=False)
class FreeEnergySeries:
    """Fixed-filling coefficients with their ingredients."""

    eps: FloatArray
    beta: float
    genus: int
    coefficients: Dict[int, float]
    nlogn: float
    log_exponent: float
    energy_route: float
    interpolation_route: float
    reference: Dict[int, float]
    gradient: FloatArray
    s_nodes: int

    def multinomial_terms(self) -> Dict[int, float]:
        """Large-N expansion of log N! / prod (N eps_h)! without its -g/2 log N."""
        k_max = max(self.coefficients)
        eps = self.eps
        out: Dict[int, float] = {k: 0.0 for k in self.coefficients}
        if self.genus == 0:
            return out
        out[-1] = float(-np.sum(eps * np.log(eps)))
        out[0] = float(-0.5 * np.sum(np.log(eps)) - 0.5 * self.genus * math.log(2 * math.pi))
        for m, b in enumerate(stirling_tail(k_max), start=1):
            out[m] = float(b * (1.0 - np.sum(eps ** (-m))))
        return out

    def with_multinomial(self) -> Dict[int, float]:
        """Coefficients of N!/prod N_h! Z_{N, eps}: the weight of one filling in the full model."""
        extra = self.multinomial_terms()
        return {k: v + extra[k] for k, v in self.coefficients.items()}

    def normalized(self) -> Dict[int, float]:
        """Coefficients of Z_{N, eps} / (prod_h N_h! (2 pi)^N).

        In this normalization the Gaussian ensemble at beta = 2 has vanishing
        odd coefficients, and so does every fixed-filling model at beta = 2.
        """
        eps = self.eps
        out = dict(self.coefficients)
        if -1 in out:
            out[-1] += float(-np.sum(eps * np.log(eps))) + 1.0 - math.log(2 * math.pi)
        if 0 in out:
            out[0] -= 0.5 * (self.genus + 1) * math.log(2 * math.pi) + 0.5 * float(np.sum(np.log(eps)))
        for m, b in enumerate(stirling_tail(max(self.coefficients)), start=1):
            out[m] -= b * float(np.sum(eps ** (-m)))
        return out

    def to_dict(self) -> Dict[str, Any]:
        return {
            "eps": self.eps.tolist(),
            "beta": self.beta,
            "coefficients": {str(k): v for k, v in sorted(self.coefficients.items())},
            "with_multinomial": {str(k): v for k, v in sorted(self.with_multinomial().items())},
            "normalized": {str(k): v for k, v in sorted(self.normalized().items())},
            "NlogN": self.nlogn,
            "logN": self.log_exponent,
            "energy_route": self.energy_route,
            "interpolation_route": self.interpolation_route,
            "reference": {str(k): v for k, v in sorted(self.reference.items())},
            "gradient": self.gradient.tolist(),
            "s_nodes": self.s_nodes,
        }


# ---------------------------------------------------------------------------
# Contour ingredients
# ---------------------------------------------------------------------------


def _gauss_legendre(n: int) -> Tuple[FloatArray, FloatArray]:
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _check_offcritical(engine: RecursionEngine, leading: LeadingOrder, s: float) -> None:
    """S = y L / sigma must not vanish inside the outermost level (argument principle)."""
    curve = engine.curve
    top = engine.levels[-1]
    values = leading.two_y(top.nodes) * curve.edge_product(False, top.nodes) / curve.sigma(top.nodes)
    scale = float(np.max(np.abs(values)))
    if not np.all(np.isfinite(values)) or float(np.min(np.abs(values))) < 1e-8 * scale:
        raise InterpolationError("Density prefactor vanishes on the contour", s=s)
    for h in range(curve.genus + 1):
        mask = top.owner == h
        ang = np.unwrap(np.angle(np.append(values[mask], values[mask][0])))
        winding = int(round((ang[-1] - ang[0]) / (2 * math.pi)))
        if winding != 0:
            raise InterpolationError("Offcriticality lost along the interpolation", s=s, cut=h, zeros=winding)


def _one_point_orders(engine: RecursionEngine, nodes: ComplexArray, k_top: int) -> Dict[int, ComplexArray]:
    pts = nodes[:, None]
    return {k: engine.evaluate(1, k, pts) for k in range(-1, k_top + 1)}


def _interpolation_rate(
    leading_v: LeadingOrder,
    mixture: ReferenceMixture,
    p: AnalyticPotential,
    beta: float,
    s: float,
    k_max: int,
    contour_nodes: int,
    logger: Optional[JSONLogger],
) -> Dict[int, float]:
    """d/ds of F^{k}(V_s), k = -2..k_max."""
    leading_s = leading_v.blend(mixture.leading(leading_v.curve), s)
    engine = RecursionEngine(leading_s, beta, [(1, k_max + 1)], contour_nodes, logger=logger)
    _check_offcritical(engine, leading_s, s)
    contour = engine.outer_contour()
    z = contour.nodes
    w1 = _one_point_orders(engine, z, k_max + 1)
    dv: Dict[int, ComplexArray] = {0: mixture.potential(z) - p.piece_derivative(0, z, 0)}
    for j in range(1, p.max_order + 1):
        if not p.piece(j).is_zero:
            dv[j] = -p.piece_derivative(j, z, 0)
    out: Dict[int, float] = {}
    for m in range(-2, k_max + 1):
        acc = 0.0 + 0.0j
        for j, vals in dv.items():
            k = m + 1 - j
            if k >= -1:
                acc += contour.integrate(vals * w1[k])
        out[m] = float(np.real(-(beta / 2.0) * acc))
    return out


def _flow_rate(mixture: ReferenceMixture, beta: float, t: float, k_max: int, contour_nodes: int) -> Dict[int, float]:
    """d/dt log Z of the mixture shrunk by t, minus the divergent part of the decoupled factors."""
    shrunk = mixture.shrunk(t)
    curve = shrunk.curve()
    leading = shrunk.leading(curve)
    engine = RecursionEngine(leading, beta, [(1, k_max + 1)], contour_nodes)
    contour = engine.outer_contour()
    z = contour.nodes
    rate = shrunk.shrink_rate(z) / t
    w1 = _one_point_orders(engine, z, k_max + 1)
    eps = mixture.eps
    out: Dict[int, float] = {}
    for m in range(-2, k_max + 1):
        val = float(np.real(-(beta / 2.0) * contour.integrate(rate * w1[m + 1])))
        if m == -2:
            val -= (beta / 2.0) * float(np.sum(eps ** 2)) / t
        elif m == -1:
            val -= (1.0 - beta / 2.0) / t
        out[m] = val
    return out


def reference_log_partition(
    mixture: ReferenceMixture,
    beta: float,
    k_max: int,
    t_nodes: int = 16,
    contour_nodes: int = 192,
) -> Dict[int, float]:
    """Regular coefficients of log Z for the reference mixture."""
    out = mixture.decoupled_series(beta, k_max)
    if mixture.genus == 0:
        return out
    ts, ws = _gauss_legendre(t_nodes)
    for t, w in zip(ts, ws):
        for m, v in _flow_rate(mixture, beta, float(t), k_max, contour_nodes).items():
            out[m] += float(w) * v
    return out


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------


def free_energy_series(
    p: AnalyticPotential,
    d: Domain,
    eps: Sequence[float],
    k_max: int,
    beta: float = 2.0,
    expansion: Optional[ExpansionConfig] = None,
    solver: Optional[SolverConfig] = None,
    measure: Optional[EquilibriumMeasure] = None,
    refine: bool = False,
    logger: Optional[JSONLogger] = None,
) -> FreeEnergySeries:
    """F^{-2..k_max} at fixed fillings ``eps``.

    With ``refine`` the s-quadrature is doubled until two rules agree to 1e-8.

    Raises:
        InterpolationError: the interpolated measure becomes critical at some s.
    """
    if k_max < 0:
        raise ParameterError("k_max must be >= 0", k_max=k_max)
    exp_cfg = expansion or ExpansionConfig()
    m = measure or solve_fixed_filling(p, d, eps, config=solver, logger=logger)
    curve = build_curve(m)
    leading_v = leading_order(m, curve, holomorphic_basis(curve))
    mixture = ReferenceMixture.from_measure(m)

    def integrate_s(n: int) -> Dict[int, float]:
        acc = {k: 0.0 for k in range(-2, k_max + 1)}
        xs, ws = _gauss_legendre(n)
        for s, w in zip(xs, ws):
            for k, v in _interpolation_rate(
                leading_v, mixture, p, beta, float(s), k_max, exp_cfg.contour_nodes, logger
            ).items():
                acc[k] += float(w) * v
        return acc

    n = exp_cfg.s_nodes
    path = integrate_s(n)
    if refine:
        for _ in range(2):
            finer = integrate_s(2 * n)
            change = max(abs(finer[k] - path[k]) for k in path)
            path, n = finer, 2 * n
            if change < 1e-8:
                break
    reference = reference_log_partition(mixture, beta, k_max, exp_cfg.s_nodes, exp_cfg.contour_nodes)
    coeffs = {k: reference[k] - path[k] for k in range(-2, k_max + 1)}
    energy_route = -(beta / 2.0) * m.energy()
    interp = coeffs[-2]
    if logger is not None:
        level = logger.warn if abs(energy_route - interp) > 1e-6 else logger.debug
        level("leading free energy", {"energy_route": energy_route, "interpolation_route": interp, "eps": list(m.filling)})
    coeffs[-2] = energy_route
    return FreeEnergySeries(
        eps=np.asarray(m.filling, dtype=float),
        beta=beta,
        genus=m.genus,
        coefficients=coeffs,
        nlogn=beta / 2.0,
        log_exponent=mixture.log_exponent(beta),
        energy_route=energy_route,
        interpolation_route=interp,
        reference=reference,
        gradient=free_energy_gradient(m, beta),
        s_nodes=n,
    )


def f_coeffs(
    p: AnalyticPotential,
    d: Domain,
    eps: Sequence[float],
    k_max: int,
    beta: float = 2.0,
    expansion: Optional[ExpansionConfig] = None,
    solver: Optional[SolverConfig] = None,
    logger: Optional[JSONLogger] = None,
) -> List[FreeEnergyTensor]:
    """F^{-2}, ..., F^{k_max} at fixed fillings, without derivatives."""
    series = free_energy_series(p, d, eps, k_max, beta, expansion, solver, logger=logger)
    return [FreeEnergyTensor(k, v) for k, v in sorted(series.coefficients.items())]


def _symmetric_fill(g: int, order: int, entries: Mapping[Tuple[int, ...], float]) -> FloatArray:
    out = np.zeros((g,) * order)
    for idx, val in entries.items():
        for perm in set(itertools.permutations(idx)):
            out[perm] = val
    return out


def eps_derivative_tensors(
    f_builder: Callable[[FloatArray], FreeEnergySeries],
    eps_star: Sequence[float],
    orders: Mapping[int, int],
    step: float = 2e-3,
    multinomial: bool = True,
    logger: Optional[JSONLogger] = None,
) -> Dict[int, FreeEnergyTensor]:
    """Symmetric eps-derivative tensors of F^{k} up to order ``orders[k]`` by nested central differences.

    F^{-2} is differentiated through its exact gradient (the Lagrange
    constants), one order fewer finite differences. With ``multinomial`` the
    tensors are those of the filling weight N!/prod N_h! Z_{N, eps}.

    Raises:
        ParameterError: the stencil leaves the simplex.
        NumericalFailure: a stencil solve fails even after halving the step twice.
    """
    center = np.asarray(eps_star, dtype=float)
    g = center.size - 1
    last: Optional[NumericalFailure] = None
    for attempt in range(STENCIL_RETRIES + 1):
        h = step / (2 ** attempt)
        try:
            return _stencil(f_builder, center, g, orders, h, multinomial)
        except NumericalFailure as exc:
            last = exc
            if logger is not None:
                logger.warn("stencil solve failed, halving step", {"step": h, "error": str(exc)})
    assert last is not None
    raise last


def _stencil(
    f_builder: Callable[[FloatArray], FreeEnergySeries],
    center: FloatArray,
    g: int,
    orders: Mapping[int, int],
    h: float,
    multinomial: bool,
) -> Dict[int, FreeEnergyTensor]:
    cache: Dict[Tuple[int, ...], FreeEnergySeries] = {}

    def at(offset: Tuple[int, ...]) -> FreeEnergySeries:
        if offset not in cache:
            eps = center.copy()
            eps[1:] += h * np.asarray(offset, dtype=float)
            eps[0] = 1.0 - float(np.sum(eps[1:]))
            if np.any(eps <= 0.0):
                raise ParameterError("Derivative stencil leaves the simplex", eps=eps.tolist(), step=h)
            cache[offset] = f_builder(eps)
        return cache[offset]

    def coeff(series: FreeEnergySeries, k: int) -> float:
        values = series.with_multinomial() if multinomial else series.coefficients
        return values[k]

    def diff(fn: Callable[[Tuple[int, ...]], float], idx: Tuple[int, ...], offset: Tuple[int, ...]) -> float:
        if not idx:
            return fn(offset)
        i, rest = idx[0], idx[1:]
        up = list(offset)
        down = list(offset)
        up[i] += 1
        down[i] -= 1
        return (diff(fn, rest, tuple(up)) - diff(fn, rest, tuple(down))) / (2.0 * h)

    zero = (0,) * g
    base = at(zero)
    out: Dict[int, FreeEnergyTensor] = {}
    for k, ell_max in sorted(orders.items()):
        value = coeff(base, k)
        derivs: Dict[int, FloatArray] = {}
        for ell in range(1, ell_max + 1):
            entries: Dict[Tuple[int, ...], float] = {}
            for idx in itertools.combinations_with_replacement(range(g), ell):
                if k == -2:
                    comp = idx[-1]
                    entries[idx] = diff(lambda o, c=comp: float(at(o).gradient[c]), idx[:-1], zero)
                else:
                    entries[idx] = diff(lambda o, kk=k: coeff(at(o), kk), idx, zero)
            derivs[ell] = _symmetric_fill(g, ell, entries)
        out[k] = FreeEnergyTensor(k, value, derivs)
    return out
