"""Equilibrium measures with fixed filling fractions.

The Stieltjes transform of a (g+1)-cut equilibrium measure is written

    W(x) = sigma(x) J(x) / 2 + R(x) Lt(x) / sigma(x)

away from the cuts, with J(x) the collapsed contour integral of V'/sigma,
Lt the product over soft edges and R a polynomial of degree < #hard edges.
Close to cut h the same function is evaluated as

    W(x) = V'(x)/2 - sigma(x) (M(x)/2 - R(x)/L(x)),   S = L M / 2 - R,

with M an ellipse integral around cut h, L the product over hard edges. The
density on cut h is (-1)^(g-h) |sigma| S / (pi L).

Unknowns of the solve are the soft-edge positions and the coefficients of R;
the equations are the Laurent conditions W = 1/x + O(1/x^2) and the fillings
of cuts 1..g.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import numpy.typing as npt
from scipy import integrate, optimize
from scipy.special import roots_jacobi

from src.logging.json_logger import JSONLogger
from src.loggas.config import SolverConfig
from src.loggas.curve import EdgeType, SpectralCurve
from src.loggas.errors import (
    AmbiguityError,
    CriticalityError,
    DomainError,
    LogGasError,
    ParameterError,
    PhaseAssumptionError,
    SolverError,
)
from src.loggas.harness.grid import grid_equilibrium
from src.loggas.potential import AnalyticPotential, Domain

ComplexArray = npt.NDArray[np.complex128]
FloatArray = npt.NDArray[np.float64]
ArrayLike = Union[complex, float, Sequence[complex], npt.NDArray[np.generic]]

LAURENT_NODES = 128
JACOBI_NODES = 160
INNER_ETA = 0.5


@dataclass(frozen=True)
class Cut:
    lo: float
    hi: float
    lo_type: EdgeType
    hi_type: EdgeType
    segment: int

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise ParameterError(f"Cut needs lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def signature(self) -> str:
        return ("+" if self.lo_type is EdgeType.SOFT else "-") + ("+" if self.hi_type is EdgeType.SOFT else "-")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lo": self.lo,
            "hi": self.hi,
            "lo_type": self.lo_type.value,
            "hi_type": self.hi_type.value,
            "segment": self.segment,
        }


@dataclass(frozen=True, eq=False)
class EquilibriumMeasure:
    """Solved (or trial) equilibrium measure; immutable, evaluators are cached."""

    cuts: Tuple[Cut, ...]
    filling: FloatArray
    poly_R: FloatArray
    potential: AnalyticPotential
    domain: Domain
    residual: float = math.nan
    cut_nodes: int = 256
    contour_nodes: int = 256

    # -- structure -----------------------------------------------------------
    @property
    def genus(self) -> int:
        return len(self.cuts) - 1

    @property
    def edges(self) -> List[float]:
        return [e for c in self.cuts for e in (c.lo, c.hi)]

    @property
    def types(self) -> List[EdgeType]:
        return [t for c in self.cuts for t in (c.lo_type, c.hi_type)]

    @cached_property
    def curve(self) -> SpectralCurve:
        return SpectralCurve(
            tuple(self.edges), tuple(self.types), self.cut_nodes, tuple(self.potential.singular_points())
        )

    @cached_property
    def _eta_in(self) -> float:
        return min(INNER_ETA, self.curve.eta_limit())

    @cached_property
    def _hard_coef(self) -> FloatArray:
        roots = [e for e, t in zip(self.edges, self.types) if t is EdgeType.HARD]
        return np.asarray(np.polynomial.polynomial.polyfromroots(roots) if roots else np.array([1.0]))

    @cached_property
    def _soft_coef(self) -> FloatArray:
        roots = [e for e, t in zip(self.edges, self.types) if t is EdgeType.SOFT]
        return np.asarray(np.polynomial.polynomial.polyfromroots(roots) if roots else np.array([1.0]))

    def _poly(self, coef: FloatArray, z: ComplexArray, der: int = 0) -> ComplexArray:
        c = np.polynomial.polynomial.polyder(coef, der) if der else coef
        if c.size == 0:
            return np.zeros_like(z)
        return np.asarray(np.polynomial.polynomial.polyval(z, c), dtype=np.complex128)

    def _R(self, z: ComplexArray, der: int = 0) -> ComplexArray:
        return self._poly(self.poly_R, z, der) if self.poly_R.size else np.zeros_like(z)

    def _vprime(self, z: ComplexArray, order: int = 1) -> ComplexArray:
        return self.potential.derivative(z, 0.0, order)

    @cached_property
    def _vp_on_cuts(self) -> List[ComplexArray]:
        return [self._vprime(self.curve.cut_rule(h)[0].astype(np.complex128)) for h in range(self.genus + 1)]

    @cached_property
    def _inner(self) -> List[Tuple[ComplexArray, ComplexArray]]:
        """Per cut: ellipse nodes and weights * V'(xi) / sigma(xi)."""
        contour = self.curve.ellipse(self._eta_in, self.contour_nodes)
        out = []
        for h in range(self.genus + 1):
            sel = contour.select(h)
            out.append((sel.nodes, sel.weights * self._vprime(sel.nodes) / self.curve.sigma(sel.nodes)))
        return out

    # -- Stieltjes transform ---------------------------------------------------
    def _J(self, z: ComplexArray, power: int = 1) -> ComplexArray:
        out = np.zeros(z.shape, dtype=np.complex128)
        for h in range(self.genus + 1):
            t, chi = self.curve.cut_rule(h)
            out = out + np.sum(chi * self._vp_on_cuts[h] / (z[..., None] - t) ** power, axis=-1)
        return out

    def _m_in(self, z: ComplexArray, h: int, power: int = 1) -> ComplexArray:
        """M(z) (power 1) or M'(z) (power 2) for z inside the ellipse of cut h."""
        xi, wf = self._inner[h]
        out = np.sum(wf / (xi - z[..., None]) ** power, axis=-1)
        for h2 in range(self.genus + 1):
            if h2 == h:
                continue
            t, chi = self.curve.cut_rule(h2)
            out = out + np.sum(chi * self._vp_on_cuts[h2] / (t - z[..., None]) ** power, axis=-1)
        return np.asarray(out, dtype=np.complex128)

    def _far(self, z: ComplexArray) -> ComplexArray:
        s = self.curve.sigma(z)
        return s * self._J(z) / 2 + self._R(z) * self._poly(self._soft_coef, z) / s

    def _far_prime(self, z: ComplexArray) -> ComplexArray:
        c = self.curve
        s, ds = c.sigma(z), c.sigma_derivative(z)
        j, dj = self._J(z), -self._J(z, 2)
        lt, dlt = self._poly(self._soft_coef, z), self._poly(self._soft_coef, z, 1)
        num = self._R(z) * lt
        dnum = self._R(z, 1) * lt + self._R(z) * dlt
        return 0.5 * (ds * j + s * dj) + dnum / s - num * ds / s ** 2

    def _near(self, z: ComplexArray, h: int) -> ComplexArray:
        s = self.curve.sigma(z)
        inner = self._m_in(z, h) / 2 - self._R(z) / self._poly(self._hard_coef, z)
        return 0.5 * self._vprime(z) - s * inner

    def _near_prime(self, z: ComplexArray, h: int) -> ComplexArray:
        c = self.curve
        s, ds = c.sigma(z), c.sigma_derivative(z)
        l, dl = self._poly(self._hard_coef, z), self._poly(self._hard_coef, z, 1)
        r, dr = self._R(z), self._R(z, 1)
        inner = self._m_in(z, h) / 2 - r / l
        dinner = self._m_in(z, h, 2) / 2 - (dr * l - r * dl) / l ** 2
        return 0.5 * self._vprime(z, 2) - ds * inner - s * dinner

    def _dispatch(self, x: ArrayLike, far: Callable[[ComplexArray], ComplexArray],
                  near: Callable[[ComplexArray, int], ComplexArray]) -> ComplexArray:
        z = np.asarray(x, dtype=np.complex128)
        flat = z.ravel()
        which = self.curve.inside(flat, 0.5 * self._eta_in)
        out = np.empty(flat.shape, dtype=np.complex128)
        mask = which < 0
        if np.any(mask):
            out[mask] = far(flat[mask])
        for h in range(self.genus + 1):
            sel = which == h
            if np.any(sel):
                out[sel] = near(flat[sel], h)
        return out.reshape(z.shape)

    def _check_off_cuts(self, x: ArrayLike) -> None:
        z = np.asarray(x, dtype=np.complex128).ravel()
        for c in self.cuts:
            on = (np.abs(z.imag) < 1e-14) & (z.real >= c.lo) & (z.real <= c.hi)
            if np.any(on):
                raise DomainError("Stieltjes transform requested on a cut; use stieltjes_boundary")

    def stieltjes(self, x: ArrayLike) -> ComplexArray:
        """W_1^{-1}(x) for x off the cuts."""
        self._check_off_cuts(x)
        return self._dispatch(x, self._far, self._near)

    def stieltjes_prime(self, x: ArrayLike) -> ComplexArray:
        self._check_off_cuts(x)
        return self._dispatch(x, self._far_prime, self._near_prime)

    def two_y(self, x: ArrayLike) -> ComplexArray:
        """2 y(x) = V'(x) - 2 W_1^{-1}(x)."""
        z = np.asarray(x, dtype=np.complex128)
        return self._vprime(z) - 2.0 * self.stieltjes(z)

    def stieltjes_boundary(self, x: ArrayLike, side: int = -1) -> ComplexArray:
        """Boundary value W(x + i0 * side) for x inside a cut."""
        t = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty(t.shape, dtype=np.complex128)
        for i, ti in enumerate(t):
            h = self.cut_of(float(ti))
            s_minus = self.curve.sigma_minus(h, np.array([ti]))[0]
            s = s_minus if side < 0 else -s_minus
            z = np.array([ti], dtype=np.complex128)
            inner = self._m_in(z, h)[0] / 2 - self._R(z)[0] / self._poly(self._hard_coef, z)[0]
            out[i] = 0.5 * self._vprime(z)[0] - s * inner
        return out

    def cut_of(self, x: float) -> int:
        for h, c in enumerate(self.cuts):
            if c.lo < x < c.hi:
                return h
        raise DomainError(f"x={x} is not inside a cut")

    # -- density -------------------------------------------------------------
    def S(self, x: ArrayLike) -> ComplexArray:
        """Density prefactor S = L M / 2 - R (analytic near the cuts)."""
        z = np.asarray(x, dtype=np.complex128)

        def far(u: ComplexArray) -> ComplexArray:
            m = -self._J(u) + self._vprime(u) / self.curve.sigma(u)
            return self._poly(self._hard_coef, u) * m / 2 - self._R(u)

        def near(u: ComplexArray, h: int) -> ComplexArray:
            return self._poly(self._hard_coef, u) * self._m_in(u, h) / 2 - self._R(u)

        return self._dispatch(z, far, near)

    def _density_on(self, h: int, t: FloatArray) -> FloatArray:
        sign = -1.0 if (self.genus - h) % 2 else 1.0
        abs_sigma = np.sqrt(np.abs(np.prod([t - e for e in self.edges], axis=0)))
        l = np.real(self._poly(self._hard_coef, t.astype(np.complex128)))
        return np.asarray(sign * abs_sigma * np.real(self.S(t)) / (math.pi * l), dtype=float)

    def density(self, x: ArrayLike) -> FloatArray:
        """dmu/dx at points inside the cuts."""
        t = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty(t.shape)
        for i, ti in enumerate(t):
            out[i] = self._density_on(self.cut_of(float(ti)), np.array([ti]))[0]
        return out

    @cached_property
    def _jacobi(self) -> List[Tuple[FloatArray, FloatArray]]:
        """Per cut: nodes t and weights integrating f against mu."""
        rules = []
        for h, c in enumerate(self.cuts):
            alpha = 0.5 if c.hi_type is EdgeType.SOFT else -0.5
            beta = 0.5 if c.lo_type is EdgeType.SOFT else -0.5
            u, w = roots_jacobi(JACOBI_NODES, alpha, beta)
            r = 0.5 * c.length
            t = c.mid + r * u
            weight = (1.0 - u) ** alpha * (1.0 + u) ** beta
            rules.append((t, r * w * self._density_on(h, t) / weight))
        return rules

    def integrate(self, f: Callable[[FloatArray], npt.ArrayLike], cut: Optional[int] = None) -> float:
        """Integral of f against the measure (or its restriction to one cut)."""
        total = 0.0
        for h, (t, w) in enumerate(self._jacobi):
            if cut is None or cut == h:
                total += float(np.real(np.sum(w * np.asarray(f(t)))))
        return total

    def moment(self, k: int) -> float:
        return self.integrate(lambda t: t ** k)

    def mass(self, h: int) -> float:
        return self.integrate(lambda t: np.ones_like(t), cut=h)

    def density_table(self, points_per_cut: int = 200) -> List[Tuple[float, float]]:
        rows: List[Tuple[float, float]] = []
        for h, c in enumerate(self.cuts):
            t = c.lo + c.length * (np.arange(points_per_cut) + 0.5) / points_per_cut
            rows.extend(zip(t.tolist(), self._density_on(h, t).tolist()))
        return rows

    # -- potentials and constants ----------------------------------------------
    def laurent(self, powers: Sequence[int], nodes: int = LAURENT_NODES) -> ComplexArray:
        """Coefficients c_k of x^k in the expansion of W at infinity."""
        rho = 2.0 * max(abs(e) for e in self.edges) + 1.0
        xi = rho * np.exp(2j * math.pi * np.arange(nodes) / nodes)
        w = self._far(xi)
        return np.array([np.mean(w * xi ** (-k)) for k in powers], dtype=np.complex128)

    def _far_point(self) -> float:
        lo, hi = self.edges[0], self.edges[-1]
        return hi + (hi - lo) + 1.0

    def log_potential(self, x: float) -> float:
        """U(x) = integral of log|x - xi| dmu(xi) at a real point."""
        big = self._far_point()
        u_big = self.integrate(lambda t: np.log(big - t))
        height = 0.5 * (self.edges[-1] - self.edges[0]) + 0.5

        def w(z: complex) -> complex:
            return complex(self._dispatch(np.array([z]), self._far, self._near)[0])

        # path x -> x + iH -> big + iH -> big; Re of integral of W dz
        up, _ = integrate.quad(lambda s: -w(x + 1j * s).imag, 0.0, height, limit=200)
        across, _ = integrate.quad(lambda s: w(s + 1j * height).real, x, big, limit=200)
        down, _ = integrate.quad(lambda s: w(big + 1j * s).imag, 0.0, height, limit=200)
        return u_big - (up + across + down)

    @cached_property
    def lagrange_constants(self) -> FloatArray:
        """C_h = 2 U - V on cut h."""
        out = []
        for c in self.cuts:
            v = float(np.real(self.potential.value(np.array([c.mid]))[0]))
            out.append(2.0 * self.log_potential(c.mid) - v)
        return np.asarray(out, dtype=float)

    def effective_potential(self, x: float) -> float:
        """V - 2U + C_h, zero on cut h and positive elsewhere in segment h."""
        h = self.domain.segment_index(float(x))
        if h is None:
            raise DomainError(f"x={x} is outside the domain")
        v = float(np.real(self.potential.value(np.array([x]))[0]))
        return v - 2.0 * self.log_potential(float(x)) + float(self.lagrange_constants[h])

    def energy(self) -> float:
        """E = int V dmu - int int log|xi - eta| dmu dmu."""
        v_int = self.integrate(lambda t: np.real(self.potential.value(t)))
        return 0.5 * v_int - 0.5 * float(np.dot(self.filling, self.lagrange_constants))

    def off_cut_zeros(self) -> List[complex]:
        """Zeros of S away from the cuts (polynomial leading potential only)."""
        if not self.potential.leading_is_polynomial:
            return []
        poly = self.potential.orders[0].poly
        deg = max(len(poly) - 2, 0)
        rho = 2.0 * max(abs(e) for e in self.edges) + 1.0
        n = LAURENT_NODES
        xi = rho * np.exp(2j * math.pi * np.arange(n) / n)
        ratio = self._vprime(xi) / self.curve.sigma(xi)
        m_coef = np.array([np.real(np.mean(ratio * xi ** (-k))) for k in range(deg + 1)])
        s_coef = np.polynomial.polynomial.polysub(
            0.5 * np.polynomial.polynomial.polymul(self._hard_coef, m_coef), self.poly_R if self.poly_R.size else [0.0]
        )
        s_coef = np.trim_zeros(np.where(np.abs(s_coef) < 1e-12 * np.max(np.abs(s_coef)), 0.0, s_coef), "b")
        if s_coef.size < 2:
            return []
        out = []
        for r in np.polynomial.polynomial.polyroots(s_coef):
            on_cut = abs(r.imag) < 1e-9 and any(c.lo <= r.real <= c.hi for c in self.cuts)
            if not on_cut:
                out.append(complex(r))
        return out

    def offcritical_margin(self) -> float:
        """Smallest of |S| at the edges and of the effective potential on the gaps."""
        s_edges = np.abs(self.S(np.asarray(self.edges, dtype=float)))
        margin = float(np.min(s_edges))
        for h, c in enumerate(self.cuts):
            seg = self.domain.segments[c.segment]
            delta = 0.05 * c.length
            for lo, hi in ((seg.lo, c.lo - delta), (c.hi + delta, seg.hi)):
                if hi - lo <= 1e-9:
                    continue
                for x in np.linspace(lo, hi, 6):
                    margin = min(margin, self.effective_potential(float(x)))
        return margin

    def to_dict(self) -> Dict[str, Any]:
        return {
            "genus": self.genus,
            "cuts": [c.to_dict() for c in self.cuts],
            "edges": self.edges,
            "types": [t.value for t in self.types],
            "filling": self.filling.tolist(),
            "poly_R": self.poly_R.tolist(),
            "lagrange_constants": self.lagrange_constants.tolist(),
            "residual": self.residual,
        }


# ---------------------------------------------------------------------------
# Solvers
# ---------------------------------------------------------------------------


def _residual(m: EquilibriumMeasure, eps: FloatArray) -> FloatArray:
    g = m.genus
    c = m.laurent(list(range(g, -2, -1)))
    eqs = list(np.real(c[:-1])) + [float(np.real(c[-1])) - 1.0]
    if g:
        contour = m.curve.ellipse(m._eta_in, m.contour_nodes, cuts=range(1, g + 1))
        w = m._far(contour.nodes)
        for h in range(1, g + 1):
            mask = contour.owner == h
            eqs.append(float(np.real(np.sum(contour.weights[mask] * w[mask]))) - float(eps[h]))
    return np.asarray(eqs, dtype=float)


@dataclass
class _Layout:
    """Where the unknowns sit: soft edges first, then the R coefficients."""

    d: Domain
    types: List[EdgeType]
    fixed: List[float]
    soft_slots: List[int] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.soft_slots = [i for i, t in enumerate(self.types) if t is EdgeType.SOFT]

    @property
    def n_hard(self) -> int:
        return len(self.types) - len(self.soft_slots)

    def edges(self, z: FloatArray) -> List[float]:
        out = list(self.fixed)
        for k, slot in enumerate(self.soft_slots):
            out[slot] = float(z[k])
        return out

    def measure(
        self, z: FloatArray, p: AnalyticPotential, eps: FloatArray, cfg: SolverConfig, residual: float = math.nan
    ) -> EquilibriumMeasure:
        e = self.edges(z)
        cuts = tuple(
            Cut(e[2 * h], e[2 * h + 1], self.types[2 * h], self.types[2 * h + 1], h) for h in range(len(e) // 2)
        )
        return EquilibriumMeasure(
            cuts=cuts,
            filling=eps,
            poly_R=np.asarray(z[len(self.soft_slots):], dtype=float),
            potential=p,
            domain=self.d,
            residual=residual,
            cut_nodes=cfg.cut_nodes,
            contour_nodes=cfg.contour_nodes,
        )


def _initial_cuts(
    p: AnalyticPotential, d: Domain, eps: Optional[FloatArray], cfg: SolverConfig, logger: Optional[JSONLogger]
) -> List[Cut]:
    grid = grid_equilibrium(p, d, None if eps is None else eps.tolist(), nodes=cfg.grid_nodes, logger=logger)
    cuts = []
    for h, (seg, sup) in enumerate(zip(d.segments, grid.support())):
        if sup is None:
            raise PhaseAssumptionError(f"Segment {h} carries no mass in the grid oracle", segment=h)
        cell = seg.length / cfg.grid_nodes
        lo_hard = sup[0] - seg.lo < 2.5 * cell
        hi_hard = seg.hi - sup[1] < 2.5 * cell
        lo = seg.lo if lo_hard else sup[0] + 0.5 * cell
        hi = seg.hi if hi_hard else sup[1] - 0.5 * cell
        cuts.append(
            Cut(lo, hi, EdgeType.HARD if lo_hard else EdgeType.SOFT, EdgeType.HARD if hi_hard else EdgeType.SOFT, h)
        )
    return cuts


def _solve_pass(
    p: AnalyticPotential, d: Domain, eps: FloatArray, cuts: Sequence[Cut], cfg: SolverConfig,
    logger: Optional[JSONLogger],
) -> Tuple[Optional[EquilibriumMeasure], _Layout, FloatArray, List[float]]:
    types = [t for c in cuts for t in (c.lo_type, c.hi_type)]
    fixed = []
    for h, c in enumerate(cuts):
        seg = d.segments[h]
        fixed.append(seg.lo if c.lo_type is EdgeType.HARD else c.lo)
        fixed.append(seg.hi if c.hi_type is EdgeType.HARD else c.hi)
    layout = _Layout(d, types, fixed)
    n_soft = len(layout.soft_slots)
    soft0 = np.array([fixed[i] for i in layout.soft_slots], dtype=float)
    trace: List[float] = []

    def fun(z: FloatArray) -> FloatArray:
        e = layout.edges(z)
        if np.any(np.diff(e) <= 1e-10):
            return np.full(len(types), 1e6)
        try:
            res = _residual(layout.measure(z, p, eps, cfg), eps)
        except LogGasError:
            return np.full(len(types), 1e6)
        trace.append(float(np.linalg.norm(res)))
        return res

    # the residual is affine in R: least squares for the initial coefficients
    z0 = np.concatenate([soft0, np.zeros(layout.n_hard)])
    if layout.n_hard:
        base = fun(z0)
        cols = []
        for j in range(layout.n_hard):
            zj = z0.copy()
            zj[n_soft + j] = 1.0
            cols.append(fun(zj) - base)
        coef, *_ = np.linalg.lstsq(np.column_stack(cols), -base, rcond=None)
        z0[n_soft:] = coef

    sol = optimize.root(fun, z0, method="hybr", options={"xtol": 1e-14, "maxfev": 400 * (len(z0) + 1)})
    z = np.asarray(sol.x, dtype=float)
    final = fun(z)
    norm = float(np.linalg.norm(final))
    if logger is not None:
        logger.debug("equilibrium pass", {"residual": norm, "evaluations": len(trace), "edges": layout.edges(z)})
    if norm > cfg.tolerance or not np.all(np.isfinite(z)):
        return None, layout, z, trace
    return layout.measure(z, p, eps, cfg, residual=norm), layout, z, trace


def _density_problems(m: EquilibriumMeasure) -> Dict[int, str]:
    """Edges (index into m.edges) next to which the density goes negative; key -1 for the bulk."""
    issues: Dict[int, str] = {}
    for h, c in enumerate(m.cuts):
        n = 64
        k = np.arange(1, n + 1)
        t = c.mid + 0.5 * c.length * np.cos((2 * k - 1) * math.pi / (2 * n))[::-1]
        rho = m._density_on(h, t)
        scale = max(float(np.max(np.abs(rho))), 1e-300)
        neg = rho < -1e-8 * scale
        if not np.any(neg):
            continue
        if np.all(~neg[4:]):
            issues[2 * h] = "lo"
        elif np.all(~neg[:-4]):
            issues[2 * h + 1] = "hi"
        else:
            issues[-1] = f"cut {h}"
    return issues


def solve_fixed_filling(
    p: AnalyticPotential,
    d: Domain,
    eps: Sequence[float],
    cut_hint: Optional[Sequence[Cut]] = None,
    config: Optional[SolverConfig] = None,
    logger: Optional[JSONLogger] = None,
) -> EquilibriumMeasure:
    """Equilibrium measure with mass eps[h] on segment h (one cut per segment).

    Raises:
        ParameterError: eps is not a probability vector matching the segments.
        SolverError: the root finder did not converge (residual trace attached).
        PhaseAssumptionError: the density is negative inside a cut.
        CriticalityError: the offcritical margin is below threshold and the policy is "error".
    """
    cfg = config or SolverConfig()
    eps_arr = np.asarray(eps, dtype=float)
    if eps_arr.shape != (len(d.segments),) or np.any(eps_arr <= 0) or abs(eps_arr.sum() - 1.0) > 1e-9:
        raise ParameterError("eps must have one positive entry per segment and sum to 1", eps=eps_arr.tolist())
    p.validate_against(d)
    cuts = list(cut_hint) if cut_hint is not None else _initial_cuts(p, d, eps_arr, cfg, logger)
    if len(cuts) != len(d.segments):
        raise ParameterError("cut_hint needs one cut per segment")

    trace: List[float] = []
    for attempt in range(cfg.max_passes):
        m, layout, z, pass_trace = _solve_pass(p, d, eps_arr, cuts, cfg, logger)
        trace.extend(pass_trace[-10:])
        edges = layout.edges(z)
        types = list(layout.types)
        changed = False
        # a soft edge that leaves its segment becomes hard
        for i in layout.soft_slots:
            seg = d.segments[i // 2]
            if (i % 2 == 0 and edges[i] <= seg.lo + 1e-12) or (i % 2 == 1 and edges[i] >= seg.hi - 1e-12):
                types[i] = EdgeType.HARD
                changed = True
        if m is not None and not changed:
            issues = _density_problems(m)
            if -1 in issues:
                raise PhaseAssumptionError("Density is negative inside a cut", where=issues[-1], edges=m.edges)
            released = [i for i in issues if m.types[i] is EdgeType.HARD]
            for i in issues:
                if m.types[i] is EdgeType.HARD:
                    types[i] = EdgeType.SOFT
            if issues and not released:
                raise PhaseAssumptionError("Density is negative next to a soft edge", edges=m.edges)
            if not released:
                return _check_margin(m, cfg, logger)
            changed = True
        if not changed:
            break
        if logger is not None:
            logger.warn("edge reclassification", {"pass": attempt, "types": [t.value for t in types]})
        cuts = []
        for h in range(len(d.segments)):
            seg = d.segments[h]
            lo = edges[2 * h] if types[2 * h] is EdgeType.SOFT else seg.lo
            hi = edges[2 * h + 1] if types[2 * h + 1] is EdgeType.SOFT else seg.hi
            if types[2 * h] is EdgeType.SOFT and lo <= seg.lo:
                lo = seg.lo + 0.05 * seg.length
            if types[2 * h + 1] is EdgeType.SOFT and hi >= seg.hi:
                hi = seg.hi - 0.05 * seg.length
            cuts.append(Cut(min(max(lo, seg.lo), hi - 1e-6), hi, types[2 * h], types[2 * h + 1], h))
    raise SolverError("Equilibrium solve did not converge", residual_trace=trace, eps=eps_arr.tolist())


def _check_margin(m: EquilibriumMeasure, cfg: SolverConfig, logger: Optional[JSONLogger]) -> EquilibriumMeasure:
    if cfg.margin_threshold <= 0.0:
        return m
    margin = m.offcritical_margin()
    if margin < cfg.margin_threshold:
        if cfg.criticality == "error":
            raise CriticalityError("Offcritical margin below threshold", margin=margin, threshold=cfg.margin_threshold)
        if logger is not None:
            logger.warn("offcritical margin below threshold", {"margin": margin, "threshold": cfg.margin_threshold})
    elif logger is not None:
        logger.debug("equilibrium solved", {"edges": m.edges, "margin": margin, "residual": m.residual})
    return m


def free_energy_gradient(m: EquilibriumMeasure, beta: float) -> FloatArray:
    """(F^{-2})'_h = -(beta/2) (C_0 - C_h), h = 1..g, in the coordinates eps_1..eps_g."""
    c = m.lagrange_constants
    return np.asarray(-(beta / 2.0) * (c[0] - c[1:]), dtype=float)


def filling_hessian(
    m: EquilibriumMeasure,
    beta: float,
    step: float = 1e-4,
    config: Optional[SolverConfig] = None,
    logger: Optional[JSONLogger] = None,
) -> FloatArray:
    """(F^{-2})'' by central differences of the gradient in eps_1..eps_g."""
    g = m.genus
    if g == 0:
        return np.zeros((0, 0))
    cfg = (config or SolverConfig()).model_copy(update={"margin_threshold": 0.0})
    hess = np.zeros((g, g))
    for j in range(g):
        grads = []
        for sgn in (1.0, -1.0):
            eps = m.filling.copy()
            eps[j + 1] += sgn * step
            eps[0] -= sgn * step
            mj = solve_fixed_filling(m.potential, m.domain, eps, cut_hint=m.cuts, config=cfg)
            grads.append(free_energy_gradient(mj, beta))
        hess[:, j] = (grads[0] - grads[1]) / (2.0 * step)
    asym = float(np.max(np.abs(hess - hess.T)))
    if logger is not None:
        logger.debug("filling hessian", {"asymmetry": asym, "hessian": hess.tolist()})
    return np.asarray(0.5 * (hess + hess.T), dtype=float)


def solve_optimal(
    p: AnalyticPotential,
    d: Domain,
    config: Optional[SolverConfig] = None,
    logger: Optional[JSONLogger] = None,
) -> Tuple[EquilibriumMeasure, FloatArray]:
    """Measure whose Lagrange constants agree on every cut, and its fillings eps*.

    Raises:
        AmbiguityError: the stationarity system is singular at the solution.
    """
    cfg = config or SolverConfig()
    g = d.genus
    if g == 0:
        m = solve_fixed_filling(p, d, [1.0], config=cfg, logger=logger)
        return m, m.filling.copy()
    grid = grid_equilibrium(p, d, None, nodes=cfg.grid_nodes, logger=logger)
    eps0 = np.clip(grid.filling(), 1e-3, None)
    eps0 = eps0 / eps0.sum()
    inner = cfg.model_copy(update={"margin_threshold": 0.0})
    state: Dict[str, EquilibriumMeasure] = {}

    def fun(x: FloatArray) -> FloatArray:
        eps = np.concatenate([[1.0 - x.sum()], x])
        if np.any(eps <= 0):
            return np.full(g, 1e3)
        hint = state["m"].cuts if "m" in state else None
        m = solve_fixed_filling(p, d, eps, cut_hint=hint, config=inner, logger=logger)
        state["m"] = m
        c = m.lagrange_constants
        return np.asarray(c[1:] - c[0], dtype=float)

    sol = optimize.root(fun, eps0[1:], method="hybr", options={"xtol": 1e-12})
    x = np.asarray(sol.x, dtype=float)
    eps_star = np.concatenate([[1.0 - x.sum()], x])
    hint = state["m"].cuts if "m" in state else None
    m = solve_fixed_filling(p, d, eps_star, cut_hint=hint, config=cfg, logger=logger)
    c = m.lagrange_constants
    if float(np.max(np.abs(c[1:] - c[0]))) > 1e-8 * max(1.0, float(np.max(np.abs(c)))):
        raise SolverError("Lagrange constants could not be equalized", residual_trace=[float(np.max(np.abs(c - c[0])))])
    hess = filling_hessian(m, 2.0, config=cfg)
    eig = np.linalg.eigvalsh(hess)
    if float(np.min(np.abs(eig))) < 1e-8 * max(1.0, float(np.max(np.abs(eig)))):
        raise AmbiguityError("Energy is flat in the filling fractions at the optimum", eigenvalues=eig.tolist())
    if logger is not None:
        logger.info("optimal filling fractions", {"eps_star": eps_star.tolist(), "edges": m.edges})
    return m, eps_star


# ---------------------------------------------------------------------------
# Functional surface
# ---------------------------------------------------------------------------


def density(m: EquilibriumMeasure, x: ArrayLike) -> FloatArray:
    return m.density(x)


def stieltjes(m: EquilibriumMeasure, x: ArrayLike) -> ComplexArray:
    return m.stieltjes(x)


def effective_potential(m: EquilibriumMeasure, x: float) -> float:
    return m.effective_potential(x)


def energy(m: EquilibriumMeasure) -> float:
    return m.energy()


def offcritical_margin(m: EquilibriumMeasure) -> float:
    return m.offcritical_margin()


def lagrange_constants(m: EquilibriumMeasure) -> FloatArray:
    return m.lagrange_constants


def density_csv(m: EquilibriumMeasure, path: Union[str, Path], points_per_cut: int = 200) -> Path:
    """Write ``x,density`` rows on a uniform interior grid of each cut."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["x", "density"])
        for x, rho in m.density_table(points_per_cut):
            writer.writerow([f"{x:.12g}", f"{rho:.12g}"])
    return out
