"""Correlator coefficients W_n^{k} of the fixed-filling model.

At order N^{1-k} the level-n loop equation reads K W_n^{k} = phi_n^{k} modulo
functions analytic near the cuts, with K f = -2 y f and

    phi_n^k(x, x_I) = - W_{n+1}^{k-1}(x, x, x_I)
                      - sum' W_{|J|+1}^{a}(x, x_J) W_{n-|J|}^{b}(x, x_{I\\J})      (a + b = k - 1)
                      - (1 - 2/beta) d/dx W_n^{k-1}(x, x_I)
                      + sum_{j>=1} (V^{j})'(x) W_n^{k-j}(x, x_I)
                      - (2/beta) sum_i W_{n-1}^{k-1}(x, x_{I\\i}) / (x - x_i)^2

where sum' drops the two terms carrying W_1^{-1}, already in K. W_1^{-1} comes
from the equilibrium measure; every other coefficient, W_2^{0} included, is
K^{-1} of its source, sampled on a stack of nested ellipses. A coefficient
on level l needs its source on level l-1, so the stack depth is the length of
the longest dependency chain.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import TYPE_CHECKING, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt

from src.logging.json_logger import JSONLogger
from src.loggas.curve import Contour, HolomorphicBasis, MasterInverse, SpectralCurve, a_periods
from src.loggas.errors import AccuracyError, ParameterError

if TYPE_CHECKING:
    from src.loggas.equilibrium import EquilibriumMeasure

ComplexArray = npt.NDArray[np.complex128]
ComplexFn = Callable[[ComplexArray], ComplexArray]

DEFAULT_NODES = 192
ETA_FRACTION = 2.0 / 3.0
MIN_NODES_PER_GAP = 30.0
_EMPTY = np.zeros((1, 0), dtype=np.complex128)


def is_zero(n: int, k: int) -> bool:
    """W_n^{k} vanishes identically below order n - 2."""
    return n < 1 or k < n - 2


def is_explicit(n: int, k: int) -> bool:
    return (n, k) == (1, -1)


def constituents(n: int, k: int, v_orders: Sequence[int] = ()) -> List[Tuple[int, int]]:
    """Coefficients appearing in the source of W_n^{k}."""
    out = [(n + 1, k - 1), (n, k - 1), (n - 1, k - 1)] + [(n, k - j) for j in v_orders]
    for size in range(n):
        for a in range(-1, k + 1):
            b = k - 1 - a
            if (size == 0 and a == -1) or (size == n - 1 and b == -1):
                continue
            out += [(size + 1, a), (n - size, b)]
    return sorted({c for c in out if not is_zero(*c)})


@lru_cache(maxsize=None)
def required_levels(n: int, k: int, v_orders: Tuple[int, ...] = ()) -> int:
    """Lowest contour level on which W_n^{k} can be sampled (0 when explicit)."""
    if is_zero(n, k) or is_explicit(n, k):
        return 0
    deps = constituents(n, k, v_orders)
    return 1 + max((required_levels(a, b, v_orders) for a, b in deps), default=0)


@dataclass(frozen=True, eq=False)
class LeadingOrder:
    """Everything the recursion needs from the leading order: W_1^{-1}, its derivative, 2y and (V^{j})'."""

    curve: SpectralCurve
    basis: HolomorphicBasis
    w: ComplexFn
    dw: ComplexFn
    two_y: ComplexFn
    v_orders: Mapping[int, ComplexFn] = field(default_factory=dict)

    def blend(self, other: "LeadingOrder", s: float) -> "LeadingOrder":
        """(1 - s) self + s other on the same curve; subleading potential pieces scale by (1 - s)."""
        a, b = 1.0 - s, s
        return LeadingOrder(
            curve=self.curve,
            basis=self.basis,
            w=lambda z: a * self.w(z) + b * other.w(z),
            dw=lambda z: a * self.dw(z) + b * other.dw(z),
            two_y=lambda z: a * self.two_y(z) + b * other.two_y(z),
            v_orders={j: (lambda z, f=f: a * f(z)) for j, f in self.v_orders.items()},
        )


class UniversalTwoPoint:
    """Closed form of W_2^{0} with vanishing A-periods:

        (1/beta) [ -1/d^2 + (sigma(x2)/d^2 + sigma'(x2)/d) / sigma(x1) ] + sum_h c_h(x2) psi_h(x1) / sigma(x1)

    with d = x1 - x2.
    """

    def __init__(self, curve: SpectralCurve, basis: HolomorphicBasis, beta: float):
        self.curve = curve
        self.basis = basis
        self.beta = beta

    def _periods(self, x2: ComplexArray) -> ComplexArray:
        g = self.curve.genus
        if g == 0:
            return np.zeros((0,) + x2.shape, dtype=np.complex128)
        s2 = self.curve.sigma(x2)[..., None]
        ds2 = self.curve.sigma_derivative(x2)[..., None]
        rows = []
        for h in range(1, g + 1):
            t, chi = self.curve.cut_rule(h)
            d = t - x2[..., None]
            rows.append(-np.sum(chi * (s2 / d ** 2 + ds2 / d), axis=-1) / self.beta)
        return np.asarray(np.stack(rows), dtype=np.complex128)

    def value(self, x1: npt.ArrayLike, x2: npt.ArrayLike) -> ComplexArray:
        z1, z2 = np.broadcast_arrays(np.asarray(x1, dtype=np.complex128), np.asarray(x2, dtype=np.complex128))
        d = z1 - z2
        s1 = self.curve.sigma(z1)
        s2, ds2 = self.curve.sigma(z2), self.curve.sigma_derivative(z2)
        out = (-1.0 / d ** 2 + (s2 / d ** 2 + ds2 / d) / s1) / self.beta
        if self.curve.genus:
            out = out + np.sum(self._periods(z2) * self.basis.evaluate(z1), axis=0) / s1
        return np.asarray(out, dtype=np.complex128)


class RecursionEngine:
    """Memoized evaluation of W_n^{k} on nested contour levels.

    Level l is the ellipse of parameter eta_top (l + 1) / (depth + 1) around
    every cut. Points handed to :meth:`evaluate` must lie outside level
    ``depth``.
    """

    def __init__(
        self,
        leading: LeadingOrder,
        beta: float,
        targets: Sequence[Tuple[int, int]],
        contour_nodes: int = DEFAULT_NODES,
        extra_levels: int = 0,
        eta_fraction: float = ETA_FRACTION,
        logger: Optional[JSONLogger] = None,
    ):
        if beta <= 0:
            raise ParameterError("beta must be positive", beta=beta)
        self.leading = leading
        self.beta = beta
        self.curve = leading.curve
        self.v_keys = tuple(sorted(leading.v_orders))
        need = max((required_levels(n, k, self.v_keys) for n, k in targets), default=1)
        self.depth = max(need - 1, 0) + extra_levels
        self.eta_top = eta_fraction * self.curve.eta_limit()
        gap = self.eta_top / (self.depth + 1)
        nodes = max(contour_nodes, int(math.ceil(MIN_NODES_PER_GAP / gap)))
        self.nodes_per_cut = nodes
        self.levels: List[Contour] = [self.curve.ellipse(gap * (l + 1), nodes) for l in range(self.depth + 1)]
        self.inverses = [MasterInverse(self.curve, leading.basis, leading.two_y, lvl) for lvl in self.levels]
        self.two_point = UniversalTwoPoint(self.curve, leading.basis, beta)
        self._w = [leading.w(lvl.nodes) for lvl in self.levels]
        self._dw = [leading.dw(lvl.nodes) for lvl in self.levels]
        self._v = {j: [f(lvl.nodes) for lvl in self.levels] for j, f in leading.v_orders.items()}
        self._T: Dict[Tuple[str, int], ComplexArray] = {}
        self._memo: Dict[Tuple[object, ...], ComplexArray] = {}
        self.logger = logger
        if logger is not None:
            logger.debug(
                "recursion engine",
                {"depth": self.depth, "nodes_per_cut": nodes, "eta_top": self.eta_top, "targets": list(targets)},
            )

    # -- transfer matrices ---------------------------------------------------
    def _transfer(self, kind: str, lvl: int) -> ComplexArray:
        key = (kind, lvl)
        if key not in self._T:
            inv = self.inverses[lvl - 1]
            pts = self.levels[lvl].nodes
            self._T[key] = inv.matrix(pts) if kind == "val" else inv.derivative_matrix(pts)
        return self._T[key]

    @staticmethod
    def _key(kind: str, n: int, k: int, lvl: int, others: ComplexArray) -> Tuple[object, ...]:
        return (kind, n, k, lvl, others.shape, others.tobytes())

    def _ensure_level(self, n: int, k: int, lvl: int) -> None:
        if lvl < 1:
            raise AccuracyError(f"Recursion depth exhausted for W_{n}^{k}; build the engine with this target", n=n, k=k)

    # -- samples on a level ----------------------------------------------------
    def grid(self, n: int, k: int, lvl: int, others: ComplexArray) -> ComplexArray:
        """W_n^k(xi_p, others_q) for xi on level ``lvl``: shape (P, Q)."""
        xi = self.levels[lvl].nodes
        q = others.shape[0]
        if q != 1 and others.shape[1] == 0:
            return np.repeat(self.grid(n, k, lvl, _EMPTY), q, axis=1)
        if is_zero(n, k):
            return np.zeros((xi.size, q), dtype=np.complex128)
        if (n, k) == (1, -1):
            return np.repeat(self._w[lvl][:, None], q, axis=1)
        key = self._key("grid", n, k, lvl, others)
        if key not in self._memo:
            self._ensure_level(n, k, lvl)
            self._memo[key] = self._transfer("val", lvl) @ self.phi(n, k, lvl - 1, others)
        return self._memo[key]

    def grid_dx(self, n: int, k: int, lvl: int, others: ComplexArray) -> ComplexArray:
        xi = self.levels[lvl].nodes
        q = others.shape[0]
        if q != 1 and others.shape[1] == 0:
            return np.repeat(self.grid_dx(n, k, lvl, _EMPTY), q, axis=1)
        if is_zero(n, k):
            return np.zeros((xi.size, q), dtype=np.complex128)
        if (n, k) == (1, -1):
            return np.repeat(self._dw[lvl][:, None], q, axis=1)
        key = self._key("dx", n, k, lvl, others)
        if key not in self._memo:
            self._ensure_level(n, k, lvl)
            self._memo[key] = self._transfer("dx", lvl) @ self.phi(n, k, lvl - 1, others)
        return self._memo[key]

    def diag(self, n: int, k: int, lvl: int, others: ComplexArray) -> ComplexArray:
        """W_n^k(xi_p, xi_p, others_q), n >= 2."""
        xi = self.levels[lvl].nodes
        p, q = xi.size, others.shape[0]
        if q != 1 and others.shape[1] == 0:
            return np.repeat(self.diag(n, k, lvl, _EMPTY), q, axis=1)
        if is_zero(n, k):
            return np.zeros((p, q), dtype=np.complex128)
        key = self._key("diag", n, k, lvl, others)
        if key not in self._memo:
            spect = np.concatenate([np.repeat(xi, q)[:, None], np.tile(others, (p, 1))], axis=1)
            full = self.grid(n, k, lvl, spect).reshape(p, p, q)
            idx = np.arange(p)
            self._memo[key] = full[idx, idx, :]
        return self._memo[key]

    def phi(self, n: int, k: int, lvl: int, others: ComplexArray) -> ComplexArray:
        """Source phi_n^k(zeta_p, others_q) for zeta on level ``lvl``."""
        if others.shape[0] != 1 and others.shape[1] == 0:
            return np.repeat(self.phi(n, k, lvl, _EMPTY), others.shape[0], axis=1)
        key = self._key("phi", n, k, lvl, others)
        if key in self._memo:
            return self._memo[key]
        zeta = self.levels[lvl].nodes
        out = np.zeros((zeta.size, others.shape[0]), dtype=np.complex128)
        if not is_zero(n + 1, k - 1):
            out -= self.diag(n + 1, k - 1, lvl, others)
        idx = list(range(n - 1))
        for size in range(n):
            for subset in itertools.combinations(idx, size):
                rest = [i for i in idx if i not in subset]
                for a in range(-1, k + 1):
                    b = k - 1 - a
                    if (size == 0 and a == -1) or (size == n - 1 and b == -1):
                        continue
                    if is_zero(size + 1, a) or is_zero(n - size, b):
                        continue
                    left = self.grid(size + 1, a, lvl, np.ascontiguousarray(others[:, list(subset)]))
                    right = self.grid(n - size, b, lvl, np.ascontiguousarray(others[:, rest]))
                    out -= left * right
        if not is_zero(n, k - 1):
            out -= (1.0 - 2.0 / self.beta) * self.grid_dx(n, k - 1, lvl, others)
        for j, samples in self._v.items():
            if not is_zero(n, k - j):
                out += samples[lvl][:, None] * self.grid(n, k - j, lvl, others)
        if n >= 2 and not is_zero(n - 1, k - 1):
            for i in idx:
                rest_cols = np.ascontiguousarray(np.delete(others, i, axis=1))
                sub = self.grid(n - 1, k - 1, lvl, rest_cols)
                out -= (2.0 / self.beta) * sub / (zeta[:, None] - others[None, :, i]) ** 2
        self._memo[key] = out
        return out

    # -- evaluation at arbitrary points ------------------------------------------
    def _check_points(self, pts: ComplexArray) -> None:
        if pts.size and self.curve.min_eta(pts) <= 1.05 * self.eta_top:
            raise AccuracyError(
                "Evaluation point too close to the cuts for this recursion stack; move it out or lower eta_fraction",
                eta=self.curve.min_eta(pts),
                required=1.05 * self.eta_top,
            )

    def _prepare(self, n: int, points: npt.ArrayLike) -> ComplexArray:
        pts = np.asarray(points, dtype=np.complex128)
        if pts.ndim == 1:
            pts = pts.reshape(-1, n) if n > 1 else pts[:, None]
        if pts.shape[1] != n:
            raise ParameterError(f"W_{n} needs {n} coordinates per point", shape=list(pts.shape))
        self._check_points(pts)
        return pts

    def evaluate(self, n: int, k: int, points: npt.ArrayLike) -> ComplexArray:
        """W_n^k at rows of ``points`` (shape (R, n))."""
        pts = self._prepare(n, points)
        x, others = pts[:, 0], np.ascontiguousarray(pts[:, 1:])
        if is_zero(n, k):
            return np.zeros(x.shape, dtype=np.complex128)
        if (n, k) == (1, -1):
            return self.leading.w(x)
        top = self.depth
        source = self.phi(n, k, top, others)
        return np.einsum("rp,pr->r", self.inverses[top].matrix(x), source)

    def evaluate_dx(self, n: int, k: int, points: npt.ArrayLike) -> ComplexArray:
        pts = self._prepare(n, points)
        x, others = pts[:, 0], np.ascontiguousarray(pts[:, 1:])
        if is_zero(n, k):
            return np.zeros(x.shape, dtype=np.complex128)
        if (n, k) == (1, -1):
            return self.leading.dw(x)
        top = self.depth
        source = self.phi(n, k, top, others)
        return np.einsum("rp,pr->r", self.inverses[top].derivative_matrix(x), source)

    def evaluate_grid(self, n: int, k: int, x: npt.ArrayLike, others: npt.ArrayLike) -> ComplexArray:
        """W_n^k(x_a, others_q) as an (A, Q) matrix; ``others`` has n - 1 columns."""
        z = np.asarray(x, dtype=np.complex128).ravel()
        rest = _EMPTY if n == 1 else np.ascontiguousarray(np.asarray(others, dtype=np.complex128).reshape(-1, n - 1))
        self._check_points(z)
        if n > 1:
            self._check_points(rest)
        if is_zero(n, k):
            return np.zeros((z.size, rest.shape[0]), dtype=np.complex128)
        if (n, k) == (1, -1):
            return self.leading.w(z)[:, None]
        return self.inverses[self.depth].matrix(z) @ self.phi(n, k, self.depth, rest)

    def contours(self, count: int, nodes: Optional[int] = None) -> List[Contour]:
        """``count`` distinct ellipses in the evaluation zone, outermost first."""
        hi = 0.5 * (1.05 * self.eta_top + self.curve.eta_limit())
        lo = 1.08 * self.eta_top
        etas = [hi - (hi - lo) * i / max(count, 1) for i in range(count)]
        return [self.curve.ellipse(eta, nodes or self.nodes_per_cut) for eta in etas]

    def outer_contour(self, nodes: Optional[int] = None, cuts: Optional[Sequence[int]] = None) -> Contour:
        """Ellipses just inside the disjointness limit, where evaluation is allowed."""
        eta = 0.5 * (1.05 * self.eta_top + self.curve.eta_limit())
        return self.curve.ellipse(eta, nodes or self.nodes_per_cut, cuts)

    def loop_residual(self, n: int, k: int, others: npt.ArrayLike, points: npt.ArrayLike) -> float:
        """Size of the non-analytic part of K W_n^k - phi_n^k on the top level.

        The residual times L(x) must be analytic near the cuts, so its Cauchy
        transform at points outside the top level vanishes.
        """
        o = np.asarray(others, dtype=np.complex128).reshape(1, n - 1)
        top = self.depth
        if top < 1:
            raise AccuracyError("loop_residual needs one level above the coefficient", n=n, k=k)
        lvl = self.levels[top]
        w = self.grid(n, k, top, o)[:, 0]
        ty = self.leading.two_y(lvl.nodes)
        res = -ty * w - self.phi(n, k, top, o)[:, 0]
        lpoly = self.curve.edge_product(False, lvl.nodes)
        z = np.atleast_1d(np.asarray(points, dtype=np.complex128))
        cauchy = np.sum(lvl.weights[None, :] * (res * lpoly)[None, :] / (lvl.nodes[None, :] - z[:, None]), axis=1)
        scale = float(np.max(np.abs(self.phi(n, k, top, o)[:, 0] * lpoly))) or 1.0
        return float(np.max(np.abs(cauchy))) / scale


@dataclass(frozen=True, eq=False)
class CorrelatorCoeff:
    """W_n^{k} as an evaluator on points off the cuts."""

    n: int
    k: int
    engine: RecursionEngine

    def __post_init__(self) -> None:
        if self.n < 1 or self.k < self.n - 2 and not (self.n == 1 and self.k == -1):
            raise ParameterError(f"No coefficient W_{self.n}^{self.k}")

    def __call__(self, *xs: npt.ArrayLike) -> ComplexArray:
        if len(xs) != self.n:
            raise ParameterError(f"W_{self.n} takes {self.n} arguments")
        arrays = np.broadcast_arrays(*[np.asarray(x, dtype=np.complex128) for x in xs])
        shape = arrays[0].shape
        pts = np.stack([a.ravel() for a in arrays], axis=1)
        return self.engine.evaluate(self.n, self.k, pts).reshape(shape)

    def dx(self, *xs: npt.ArrayLike) -> ComplexArray:
        arrays = np.broadcast_arrays(*[np.asarray(x, dtype=np.complex128) for x in xs])
        shape = arrays[0].shape
        pts = np.stack([a.ravel() for a in arrays], axis=1)
        return self.engine.evaluate_dx(self.n, self.k, pts).reshape(shape)

    @property
    def periods(self) -> npt.NDArray[np.complex128]:
        """Prescribed A-periods: eps for W_1^{-1}, zero otherwise."""
        return np.zeros(self.engine.curve.genus, dtype=np.complex128)

    def a_periods(self, others: Sequence[complex] = ()) -> npt.NDArray[np.complex128]:
        """A_h-periods in the first variable, h = 1..g, on the outer contour."""
        contour = self.engine.outer_contour()
        pts = np.column_stack([contour.nodes] + [np.full(len(contour), o, dtype=np.complex128) for o in others])
        values = self.engine.evaluate(self.n, self.k, pts)
        return a_periods(self.engine.curve, contour, values)


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------


def leading_order(m: "EquilibriumMeasure", curve: SpectralCurve, basis: HolomorphicBasis) -> LeadingOrder:
    """Leading-order bundle of a solved measure on its spectral curve."""
    pot = m.potential
    v_orders: Dict[int, ComplexFn] = {}
    for j in range(1, pot.max_order + 1):
        if not pot.piece(j).is_zero:
            v_orders[j] = lambda z, j=j: pot.piece_derivative(j, z, 1)
    return LeadingOrder(curve, basis, m.stieltjes, m.stieltjes_prime, m.two_y, v_orders)


def build_engine(
    m: "EquilibriumMeasure",
    curve: SpectralCurve,
    basis: HolomorphicBasis,
    beta: float,
    targets: Sequence[Tuple[int, int]],
    contour_nodes: int = DEFAULT_NODES,
    logger: Optional[JSONLogger] = None,
) -> RecursionEngine:
    return RecursionEngine(leading_order(m, curve, basis), beta, targets, contour_nodes, logger=logger)


def w1_order0(
    m: "EquilibriumMeasure", c: SpectralCurve, basis: HolomorphicBasis, beta: float, contour_nodes: int = DEFAULT_NODES
) -> CorrelatorCoeff:
    """W_1^{0} = K^{-1}[-(1 - 2/beta) d/dx W_1^{-1} + (V^{1})' W_1^{-1}] with zero A-periods."""
    return CorrelatorCoeff(1, 0, build_engine(m, c, basis, beta, [(1, 0)], contour_nodes))


def w2_order0(
    m: "EquilibriumMeasure", c: SpectralCurve, basis: HolomorphicBasis, beta: float, contour_nodes: int = DEFAULT_NODES
) -> CorrelatorCoeff:
    """W_2^{0}(x, x2) = K^{-1}[-(2/beta) W_1^{-1}(x) / (x - x2)^2] with zero A-periods."""
    return CorrelatorCoeff(2, 0, build_engine(m, c, basis, beta, [(2, 0)], contour_nodes))


def wn_coeff(
    m: "EquilibriumMeasure",
    c: SpectralCurve,
    basis: HolomorphicBasis,
    n: int,
    k: int,
    beta: float,
    contour_nodes: int = DEFAULT_NODES,
    engine: Optional[RecursionEngine] = None,
) -> CorrelatorCoeff:
    """W_n^{k} from the recursion; pass ``engine`` to share memoized lower orders."""
    if engine is None:
        engine = build_engine(m, c, basis, beta, [(n, k)], contour_nodes)
    elif engine.depth + 1 < required_levels(n, k, engine.v_keys):
        raise AccuracyError(f"Engine is too shallow for W_{n}^{k}", depth=engine.depth)
    return CorrelatorCoeff(n, k, engine)
