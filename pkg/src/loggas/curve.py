"""Spectral curve of a multi-cut equilibrium measure.

    sigma(x)^2 = prod_e (x - e)  over the 2(g+1) edges.

sigma is the product of principal square roots, which is analytic off the
cuts, conjugation symmetric and ~ x^{g+1} at infinity. Functions on the curve
are sampled on ellipses, one per cut:

    xi(theta) = c + r cosh(eta + i theta)

and contour integrals are trapezoid sums, spectrally accurate for integrands
analytic in an annulus around the ellipse. Integrals of f/sigma over A-cycles
collapse onto the cut and use Gauss-Chebyshev nodes instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import TYPE_CHECKING, Callable, List, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt

from src.loggas.errors import AccuracyError, CriticalityError, DegenerateCurveError, ParameterError

if TYPE_CHECKING:
    from src.loggas.equilibrium import EquilibriumMeasure

ComplexArray = npt.NDArray[np.complex128]
FloatArray = npt.NDArray[np.float64]
ComplexFn = Callable[[ComplexArray], ComplexArray]

DEFAULT_CUT_NODES = 256
DEFAULT_CONTOUR_NODES = 256
MAX_ETA = 0.9


class EdgeType(str, Enum):
    SOFT = "soft"
    HARD = "hard"


@dataclass(frozen=True)
class Contour:
    """Union of ellipses; ``sum(weights * f(nodes))`` approximates the integral of f dx / 2 i pi."""

    nodes: ComplexArray
    weights: ComplexArray
    owner: npt.NDArray[np.int64]
    eta: float

    def integrate(self, values: npt.ArrayLike) -> complex:
        return complex(np.sum(self.weights * np.asarray(values)))

    def __len__(self) -> int:
        return int(self.nodes.shape[0])

    def select(self, h: int) -> "Contour":
        mask = self.owner == h
        return Contour(self.nodes[mask], self.weights[mask], self.owner[mask], self.eta)


@dataclass(frozen=True, eq=False)
class SpectralCurve:
    """Real hyperelliptic curve with cuts [edges[2h], edges[2h+1]]."""

    edges: Tuple[float, ...]
    types: Tuple[EdgeType, ...]
    cut_nodes: int = DEFAULT_CUT_NODES
    forbidden: Tuple[complex, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if len(self.edges) < 2 or len(self.edges) % 2:
            raise ParameterError("A spectral curve needs an even, nonzero number of edges")
        if len(self.types) != len(self.edges):
            raise ParameterError("One edge type per edge is required")
        diffs = np.diff(np.asarray(self.edges, dtype=float))
        if np.any(diffs <= 1e-12):
            raise CriticalityError("Edges must be pairwise distinct and increasing", edges=list(self.edges))

    # -- structure ---------------------------------------------------------
    @property
    def genus(self) -> int:
        return len(self.edges) // 2 - 1

    @property
    def cuts(self) -> List[Tuple[float, float]]:
        return [(self.edges[2 * h], self.edges[2 * h + 1]) for h in range(self.genus + 1)]

    @property
    def hard_edges(self) -> List[float]:
        return [e for e, t in zip(self.edges, self.types) if t is EdgeType.HARD]

    @property
    def soft_edges(self) -> List[float]:
        return [e for e, t in zip(self.edges, self.types) if t is EdgeType.SOFT]

    def center(self, h: int) -> float:
        lo, hi = self.cuts[h]
        return 0.5 * (lo + hi)

    def half_length(self, h: int) -> float:
        lo, hi = self.cuts[h]
        return 0.5 * (hi - lo)

    def cut_index(self, x: float) -> Optional[int]:
        for h, (lo, hi) in enumerate(self.cuts):
            if lo <= x <= hi:
                return h
        return None

    def signature(self, h: int) -> str:
        lo_t, hi_t = self.types[2 * h], self.types[2 * h + 1]
        return ("+" if lo_t is EdgeType.SOFT else "-") + ("+" if hi_t is EdgeType.SOFT else "-")

    # -- sigma -------------------------------------------------------------
    def sigma(self, x: npt.ArrayLike) -> ComplexArray:
        z = np.asarray(x, dtype=np.complex128)
        out = np.ones_like(z)
        for e in self.edges:
            out = out * np.sqrt(z - e)
        return out

    def sigma_log_derivative(self, x: npt.ArrayLike) -> ComplexArray:
        z = np.asarray(x, dtype=np.complex128)
        return 0.5 * sum((1.0 / (z - e) for e in self.edges), np.zeros_like(z))

    def sigma_derivative(self, x: npt.ArrayLike) -> ComplexArray:
        return self.sigma(x) * self.sigma_log_derivative(x)

    def sigma_gap_sign(self, x: float) -> int:
        """Sign of sigma on the real axis outside the cuts: (-1)^(cuts to the right)."""
        right = sum(1 for lo, _ in self.cuts if lo > x)
        return -1 if right % 2 else 1

    def edge_product(self, soft: bool, x: npt.ArrayLike) -> ComplexArray:
        """L (hard edges, soft=False) or L-tilde (soft edges, soft=True) evaluated at x."""
        z = np.asarray(x, dtype=np.complex128)
        out = np.ones_like(z)
        for e, t in zip(self.edges, self.types):
            if (t is EdgeType.SOFT) == soft:
                out = out * (z - e)
        return out

    def _omega(self, h: int, t: FloatArray) -> FloatArray:
        out = np.ones_like(t)
        for j, e in enumerate(self.edges):
            if j // 2 != h:
                out = out * np.sqrt(np.abs(t - e))
        return out

    def sigma_minus(self, h: int, t: npt.ArrayLike) -> ComplexArray:
        """Boundary value sigma(t - i0) for t inside cut h."""
        tt = np.asarray(t, dtype=float)
        lo, hi = self.cuts[h]
        phase = (-1j) ** (2 * (self.genus - h) + 1)
        return phase * np.sqrt((tt - lo) * (hi - tt)) * self._omega(h, tt)

    # -- quadrature on the cuts -----------------------------------------------
    @cached_property
    def _cut_rules(self) -> List[Tuple[FloatArray, ComplexArray]]:
        n = self.cut_nodes
        k = np.arange(1, n + 1)
        base = np.cos((2 * k - 1) * math.pi / (2 * n))
        rules = []
        for h in range(self.genus + 1):
            c, r = self.center(h), self.half_length(h)
            t = c + r * base
            phase = (-1j) ** (2 * (self.genus - h) + 1)
            chi = 1.0 / (1j * phase * n * self._omega(h, t))
            rules.append((t, chi.astype(np.complex128)))
        return rules

    def cut_rule(self, h: int) -> Tuple[FloatArray, ComplexArray]:
        """(nodes, weights) with sum(weights * f(nodes)) = A_h-period of f/sigma over 2 i pi."""
        return self._cut_rules[h]

    def a_period_over_sigma(self, h: int, f: ComplexFn) -> complex:
        t, chi = self.cut_rule(h)
        return complex(np.sum(chi * f(t.astype(np.complex128))))

    def cauchy_over_sigma(self, values_on_cuts: Sequence[ComplexArray], x: npt.ArrayLike) -> ComplexArray:
        """sum_h A_h-period of f(t) / (sigma(t) (x - t)) from samples of f on the cut nodes."""
        z = np.asarray(x, dtype=np.complex128)
        out = np.zeros(z.shape, dtype=np.complex128)
        for h in range(self.genus + 1):
            t, chi = self.cut_rule(h)
            out = out + np.sum(chi * values_on_cuts[h] / (z[..., None] - t), axis=-1)
        return out

    # -- ellipses ------------------------------------------------------------
    def elliptic_radius(self, h: int, x: npt.ArrayLike) -> FloatArray:
        """eta such that x lies on the ellipse of parameter eta around cut h."""
        w = (np.asarray(x, dtype=np.complex128) - self.center(h)) / self.half_length(h)
        return np.asarray(np.abs(np.real(np.arccosh(w))), dtype=float)

    def eta_limit(self) -> float:
        """Largest ellipse parameter keeping the per-cut ellipses disjoint and clear of forbidden points."""
        limit = MAX_ETA
        cuts = self.cuts
        for h in range(self.genus + 1):
            r = self.half_length(h)
            if h > 0:
                gap = cuts[h][0] - cuts[h - 1][1]
                limit = min(limit, 0.9 * math.acosh(1.0 + 0.5 * gap / r))
            if h < self.genus:
                gap = cuts[h + 1][0] - cuts[h][1]
                limit = min(limit, 0.9 * math.acosh(1.0 + 0.5 * gap / r))
            for z in self.forbidden:
                limit = min(limit, 0.9 * float(self.elliptic_radius(h, z)))
        if limit <= 0.0:
            raise CriticalityError("No room for contours around the cuts", edges=list(self.edges))
        return limit

    def ellipse(self, eta: float, nodes: int = DEFAULT_CONTOUR_NODES, cuts: Optional[Sequence[int]] = None) -> Contour:
        """Counterclockwise ellipses of parameter eta around the selected cuts."""
        which = list(range(self.genus + 1)) if cuts is None else list(cuts)
        theta = 2 * math.pi * np.arange(nodes) / nodes
        pts, wts, own = [], [], []
        for h in which:
            c, r = self.center(h), self.half_length(h)
            arg = eta + 1j * theta
            pts.append(c + r * np.cosh(arg))
            # d xi / d theta = i r sinh(eta + i theta); weight = xi' (2 pi / M) / (2 i pi)
            wts.append(1j * r * np.sinh(arg) / (1j * nodes))
            own.append(np.full(nodes, h, dtype=np.int64))
        return Contour(
            np.concatenate(pts).astype(np.complex128),
            np.concatenate(wts).astype(np.complex128),
            np.concatenate(own),
            eta,
        )

    def inside(self, x: npt.ArrayLike, eta: float) -> npt.NDArray[np.int64]:
        """Index of the cut whose eta-ellipse contains x, or -1."""
        z = np.asarray(x, dtype=np.complex128)
        out = np.full(z.shape, -1, dtype=np.int64)
        for h in range(self.genus + 1):
            out = np.where((out < 0) & (self.elliptic_radius(h, z) < eta), h, out)
        return out

    def min_eta(self, x: npt.ArrayLike) -> float:
        """Smallest elliptic radius of x over all cuts."""
        z = np.asarray(x, dtype=np.complex128).ravel()
        if z.size == 0:
            return math.inf
        return float(min(np.min(self.elliptic_radius(h, z)) for h in range(self.genus + 1)))


@dataclass(frozen=True, eq=False)
class HolomorphicBasis:
    """psi_h (rows: ascending coefficients, h = 1..g) with A_h-period of psi_h'/sigma equal to delta."""

    psi: FloatArray
    condition: float

    @property
    def size(self) -> int:
        return int(self.psi.shape[0])

    def evaluate(self, x: npt.ArrayLike) -> ComplexArray:
        """Array of shape (g,) + x.shape."""
        z = np.asarray(x, dtype=np.complex128)
        if self.size == 0:
            return np.zeros((0,) + z.shape, dtype=np.complex128)
        return np.stack([np.polynomial.polynomial.polyval(z, row) for row in self.psi])

    def evaluate_derivative(self, x: npt.ArrayLike) -> ComplexArray:
        z = np.asarray(x, dtype=np.complex128)
        if self.size == 0:
            return np.zeros((0,) + z.shape, dtype=np.complex128)
        return np.stack(
            [np.polynomial.polynomial.polyval(z, np.polynomial.polynomial.polyder(row)) for row in self.psi]
        )

    def forms(self, curve: SpectralCurve, x: npt.ArrayLike) -> ComplexArray:
        """psi_h(x) / sigma(x), the normalized holomorphic differentials over dx."""
        return self.evaluate(x) / curve.sigma(x)


@dataclass(frozen=True)
class EdgePartitionPolys:
    """L(x) = prod over hard edges (x - a), with its divided differences."""

    roots: Tuple[float, ...]

    @property
    def coefficients(self) -> FloatArray:
        return np.asarray(np.polynomial.polynomial.polyfromroots(self.roots) if self.roots else np.array([1.0]))

    def L(self, x: npt.ArrayLike) -> ComplexArray:
        z = np.asarray(x, dtype=np.complex128)
        return np.asarray(np.polynomial.polynomial.polyval(z, self.coefficients), dtype=np.complex128)

    def L1(self, x: npt.ArrayLike, xi: npt.ArrayLike) -> ComplexArray:
        """(L(x) - L(xi)) / (x - xi), polynomial in both arguments."""
        z = np.asarray(x, dtype=np.complex128)
        w = np.asarray(xi, dtype=np.complex128)
        c = self.coefficients
        out = np.zeros(np.broadcast(z, w).shape, dtype=np.complex128)
        # sum_k c_k (x^k - xi^k)/(x - xi) = sum_k c_k sum_{j<k} x^j xi^{k-1-j}
        for k in range(1, len(c)):
            for j in range(k):
                out = out + c[k] * z ** j * w ** (k - 1 - j)
        return out

    def L2(self, x: npt.ArrayLike, xi1: npt.ArrayLike, xi2: npt.ArrayLike) -> ComplexArray:
        """Second divided difference L[x, xi1, xi2]."""
        z = np.asarray(x, dtype=np.complex128)
        a = np.asarray(xi1, dtype=np.complex128)
        b = np.asarray(xi2, dtype=np.complex128)
        c = self.coefficients
        out = np.zeros(np.broadcast(z, a, b).shape, dtype=np.complex128)
        # complete homogeneous symmetric polynomials h_{k-2}(x, xi1, xi2)
        for k in range(2, len(c)):
            deg = k - 2
            for i in range(deg + 1):
                for j in range(deg + 1 - i):
                    out = out + c[k] * z ** i * a ** j * b ** (deg - i - j)
        return out


def build_curve(
    m: "EquilibriumMeasure", cut_nodes: int = DEFAULT_CUT_NODES, forbidden: Sequence[complex] = ()
) -> SpectralCurve:
    """Spectral curve of a solved measure; off-cut zeros of its S and the potential's singularities are kept clear."""
    edges: List[float] = []
    types: List[EdgeType] = []
    for cut in m.cuts:
        edges.extend([cut.lo, cut.hi])
        types.extend([cut.lo_type, cut.hi_type])
    avoid = list(forbidden) + list(m.potential.singular_points()) + list(m.off_cut_zeros())
    return SpectralCurve(tuple(edges), tuple(types), cut_nodes, tuple(avoid))


def holomorphic_basis(c: SpectralCurve) -> HolomorphicBasis:
    """Solve the g x g A-period normalization.

    Raises:
        DegenerateCurveError: the period system is numerically singular.
    """
    g = c.genus
    if g == 0:
        return HolomorphicBasis(np.zeros((0, 0)), 1.0)
    a = np.zeros((g, g), dtype=np.complex128)
    for row, h in enumerate(range(1, g + 1)):
        t, chi = c.cut_rule(h)
        for j in range(g):
            a[row, j] = np.sum(chi * t ** j)
    if np.max(np.abs(a.imag)) > 1e-8 * max(1.0, float(np.max(np.abs(a.real)))):
        raise DegenerateCurveError("A-period matrix is not real; branch bookkeeping failed")
    real = a.real
    cond = float(np.linalg.cond(real))
    if not math.isfinite(cond) or cond > 1e12:
        raise DegenerateCurveError("A-period system is singular", condition=cond)
    inv = np.linalg.inv(real)
    # psi_{h'}(x) = sum_j inv[j, h'] x^j
    return HolomorphicBasis(np.ascontiguousarray(inv.T), cond)


def period_matrix(c: SpectralCurve, basis: HolomorphicBasis, hessian: npt.ArrayLike) -> npt.NDArray[np.complex128]:
    """tau = (F^{-2})'' / 2 i pi from the epsilon-Hessian of the leading free energy.

    Raises:
        ParameterError: the Hessian is not symmetric negative definite.
    """
    g = c.genus
    hess = np.atleast_2d(np.asarray(hessian, dtype=float)) if g else np.zeros((0, 0))
    if hess.shape != (g, g):
        raise ParameterError(f"Hessian must be {g} x {g}", shape=list(hess.shape))
    if basis.size != g:
        raise ParameterError("Holomorphic basis does not match the genus")
    if g == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    asym = float(np.max(np.abs(hess - hess.T)))
    if asym > 1e-6 * max(1.0, float(np.max(np.abs(hess)))):
        raise ParameterError("Free-energy Hessian is not symmetric", asymmetry=asym)
    sym = 0.5 * (hess + hess.T)
    eig = np.linalg.eigvalsh(sym)
    if eig.max() >= 0.0:
        raise ParameterError("Free-energy Hessian is not negative definite", eigenvalues=eig.tolist())
    return np.asarray(sym / (2j * math.pi), dtype=np.complex128)


def edge_partition(m: "EquilibriumMeasure") -> EdgePartitionPolys:
    roots = []
    for cut in m.cuts:
        if cut.lo_type is EdgeType.HARD:
            roots.append(cut.lo)
        if cut.hi_type is EdgeType.HARD:
            roots.append(cut.hi)
    return EdgePartitionPolys(tuple(roots))


# ---------------------------------------------------------------------------
# Master operator and its inverse
# ---------------------------------------------------------------------------


class MasterInverse:
    """Inverse of f -> -2 y f (modulo functions analytic near the cuts).

    For phi sampled on an inner contour C and x outside C,

        f(x) = [ sum_m q_m phi_m / (xi_m - x) - sum_h c_h[phi] psi_h(x) + sum_h w_h psi_h(x) ] / sigma(x)

    with q_m = weight_m sigma(xi_m) / (2 y(xi_m)); c_h[phi] removes the A-periods.
    """

    def __init__(self, curve: SpectralCurve, basis: HolomorphicBasis, two_y: ComplexFn, inner: Contour):
        self.curve = curve
        self.basis = basis
        self.inner = inner
        xi = inner.nodes
        self.q = inner.weights * curve.sigma(xi) / two_y(xi)
        g = curve.genus
        self._a = np.zeros((len(xi), g), dtype=np.complex128)
        s_xi = curve.sigma(xi)
        for col, h in enumerate(range(1, g + 1)):
            t, chi = curve.cut_rule(h)
            direct = np.sum(chi / (xi[:, None] - t), axis=1)
            around = np.where(inner.owner == h, 1.0 / s_xi, 0.0)
            self._a[:, col] = direct - around
        self.Q = self.q[:, None] * self._a

    def _check_outside(self, x: ComplexArray) -> None:
        if x.size and self.curve.min_eta(x) <= self.inner.eta * 1.05:
            raise AccuracyError(
                "Evaluation point too close to the inner contour; double the contour nodes or move the point",
                eta=self.curve.min_eta(x),
                contour_eta=self.inner.eta,
            )

    def matrix(self, x: npt.ArrayLike) -> ComplexArray:
        """T[p, m] such that f(x_p) = T @ phi (zero A-period vector)."""
        z = np.asarray(x, dtype=np.complex128).ravel()
        self._check_outside(z)
        xi = self.inner.nodes
        core = self.q[None, :] / (xi[None, :] - z[:, None])
        if self.basis.size:
            psi = self.basis.evaluate(z)  # (g, P)
            core = core - psi.T @ self.Q.T
        return core / self.curve.sigma(z)[:, None]

    def derivative_matrix(self, x: npt.ArrayLike) -> ComplexArray:
        """d/dx of :meth:`matrix` rows."""
        z = np.asarray(x, dtype=np.complex128).ravel()
        self._check_outside(z)
        xi = self.inner.nodes
        g_val = self.q[None, :] / (xi[None, :] - z[:, None])
        g_der = self.q[None, :] / (xi[None, :] - z[:, None]) ** 2
        if self.basis.size:
            g_val = g_val - self.basis.evaluate(z).T @ self.Q.T
            g_der = g_der - self.basis.evaluate_derivative(z).T @ self.Q.T
        s = self.curve.sigma(z)[:, None]
        dlog = self.curve.sigma_log_derivative(z)[:, None]
        return (g_der - g_val * dlog) / s

    def periods_term(self, x: npt.ArrayLike, w: npt.ArrayLike) -> ComplexArray:
        z = np.asarray(x, dtype=np.complex128).ravel()
        if self.basis.size == 0:
            return np.zeros(z.shape, dtype=np.complex128)
        return np.asarray(np.asarray(w, dtype=np.complex128) @ self.basis.forms(self.curve, z))

    def apply(self, phi: npt.ArrayLike, x: npt.ArrayLike, w: Optional[npt.ArrayLike] = None) -> ComplexArray:
        out = self.matrix(x) @ np.asarray(phi, dtype=np.complex128)
        if w is not None:
            out = out + self.periods_term(x, w)
        return out


def inverse_master_operator(
    c: SpectralCurve,
    basis: HolomorphicBasis,
    phi: ComplexArray,
    w: npt.ArrayLike,
    two_y: ComplexFn,
    inner: Contour,
    x: npt.ArrayLike,
) -> ComplexArray:
    """Values at x of the unique f with -2 y f = phi modulo analytic terms, O(1/x^2), A-periods w."""
    if np.asarray(phi).shape != (len(inner),):
        raise ParameterError("phi must be sampled on the inner contour nodes")
    return MasterInverse(c, basis, two_y, inner).apply(phi, x, w)


def master_operator(f_values: npt.ArrayLike, two_y_values: npt.ArrayLike) -> ComplexArray:
    """Non-analytic part of the master operator: K f = -2 y f."""
    return np.asarray(-np.asarray(two_y_values) * np.asarray(f_values), dtype=np.complex128)


def a_periods(c: SpectralCurve, contour: Contour, values: npt.ArrayLike) -> ComplexArray:
    """A_h-periods (h = 1..g) of a function sampled on per-cut ellipses."""
    vals = np.asarray(values, dtype=np.complex128)
    out = np.zeros(c.genus, dtype=np.complex128)
    for h in range(1, c.genus + 1):
        mask = contour.owner == h
        out[h - 1] = np.sum(contour.weights[mask] * vals[mask])
    return out
