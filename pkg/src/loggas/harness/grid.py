"""Grid energy minimization: a discrete oracle for equilibrium measures.

Masses p_i sit at cell midpoints x_i of a uniform grid on every segment and
minimize

    E(p) = sum_i V(x_i) p_i - sum_{i,j} K_ij p_i p_j,   K_ij = log|x_i - x_j|,

where the diagonal K_ii = log h_i - 3/2 is the mean of log|s - t| over one
cell. With fixed fillings the feasible set is a product of simplices, one per
segment; in free mode it is a single simplex.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt

from src.logging.json_logger import JSONLogger
from src.loggas.errors import ParameterError
from src.loggas.potential import AnalyticPotential, Domain

FloatArray = npt.NDArray[np.float64]

SUPPORT_THRESHOLD = 1e-6


def project_simplex(v: FloatArray, z: float = 1.0) -> FloatArray:
    """Euclidean projection onto {y >= 0, sum(y) = z} (sort-based)."""
    u = np.sort(v)[::-1]
    cssv = np.cumsum(u) - z
    ind = np.arange(1, len(v) + 1)
    cond = u - cssv / ind > 0
    rho = int(np.count_nonzero(cond))
    theta = cssv[rho - 1] / rho
    return np.asarray(np.maximum(v - theta, 0.0), dtype=float)


def project_product(v: FloatArray, blocks: Sequence[slice], masses: Sequence[float]) -> FloatArray:
    out = np.empty_like(v)
    for sl, z in zip(blocks, masses):
        out[sl] = project_simplex(v[sl], z)
    return out


@dataclass(frozen=True, eq=False)
class GridMeasure:
    """Discrete minimizer on a segment grid."""

    nodes: FloatArray
    masses: FloatArray
    widths: FloatArray
    segment: npt.NDArray[np.int64]
    objective: float
    gradient_norm: float
    iterations: int
    converged: bool
    multipliers: FloatArray

    def density(self) -> FloatArray:
        return np.asarray(self.masses / self.widths, dtype=float)

    def moment(self, k: int) -> float:
        return float(np.sum(self.masses * self.nodes ** k))

    def filling(self) -> FloatArray:
        n_seg = int(self.segment.max()) + 1
        return np.array([self.masses[self.segment == h].sum() for h in range(n_seg)])

    def support(self, threshold: float = SUPPORT_THRESHOLD) -> List[Optional[Tuple[float, float]]]:
        """Per segment, the hull of the cells carrying more than ``threshold`` mass."""
        out: List[Optional[Tuple[float, float]]] = []
        for h in range(int(self.segment.max()) + 1):
            mask = (self.segment == h) & (self.masses > threshold)
            if not np.any(mask):
                out.append(None)
                continue
            idx = np.flatnonzero(mask)
            lo = float(self.nodes[idx[0]] - 0.5 * self.widths[idx[0]])
            hi = float(self.nodes[idx[-1]] + 0.5 * self.widths[idx[-1]])
            out.append((lo, hi))
        return out

    def energy(self) -> float:
        return self.objective


def _grid(d: Domain, nodes: int) -> Tuple[FloatArray, FloatArray, npt.NDArray[np.int64], List[slice]]:
    xs, ws, seg, blocks = [], [], [], []
    start = 0
    for h, s in enumerate(d.segments):
        h_cell = s.length / nodes
        xs.append(s.lo + h_cell * (np.arange(nodes) + 0.5))
        ws.append(np.full(nodes, h_cell))
        seg.append(np.full(nodes, h, dtype=np.int64))
        blocks.append(slice(start, start + nodes))
        start += nodes
    return np.concatenate(xs), np.concatenate(ws), np.concatenate(seg), blocks


def _kernel(x: FloatArray, w: FloatArray) -> FloatArray:
    diff = np.abs(x[:, None] - x[None, :])
    np.fill_diagonal(diff, 1.0)
    k = np.log(diff)
    np.fill_diagonal(k, np.log(w) - 1.5)
    return np.asarray(k, dtype=float)


def _kkt_polish(
    v: FloatArray,
    k: FloatArray,
    p0: FloatArray,
    groups: npt.NDArray[np.int64],
    masses: Sequence[float],
    max_rounds: int = 60,
) -> Tuple[FloatArray, FloatArray]:
    """Active-set solve of the stationarity system on the support.

    Returns the masses and one multiplier per group (empty when no stable
    active set was found).
    """
    n_groups = len(masses)
    active = p0 > SUPPORT_THRESHOLD * 1e-3
    best = p0
    lam = np.zeros(0)
    for _ in range(max_rounds):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        n = idx.size
        a = np.zeros((n + n_groups, n + n_groups))
        a[:n, :n] = -2.0 * k[np.ix_(idx, idx)]
        for gidx in range(n_groups):
            cols = groups[idx] == gidx
            a[:n, n + gidx][cols] = -1.0
            a[n + gidx, :n][cols] = 1.0
        rhs = np.concatenate([-v[idx], np.asarray(masses, dtype=float)])
        try:
            sol = np.linalg.solve(a, rhs)
        except np.linalg.LinAlgError:
            break
        p = np.zeros_like(p0)
        p[idx] = sol[:n]
        mult = sol[n:]
        if np.any(p[idx] < 0.0):
            active[idx[p[idx] < 0.0]] = False
            continue
        grad = v - 2.0 * k @ p
        slack = grad - mult[groups]
        violators = (~active) & (slack < -1e-12 * max(1.0, float(np.max(np.abs(grad)))))
        best, lam = p, mult
        if not np.any(violators):
            break
        active |= violators
    return best, lam


def grid_equilibrium(
    p: AnalyticPotential,
    d: Domain,
    eps: Optional[Sequence[float]] = None,
    nodes: int = 600,
    max_iter: int = 3000,
    tol: float = 1e-11,
    logger: Optional[JSONLogger] = None,
) -> GridMeasure:
    """Minimize the discretized energy with fixed fillings ``eps`` (or freely when None).

    Projected FISTA with backtracking locates the support; an active-set solve
    of the stationarity conditions then polishes it and is kept only when it
    lowers the objective.
    """
    if nodes < 50:
        raise ParameterError("grid_equilibrium needs at least 50 nodes per segment", nodes=nodes)
    x, w, seg, blocks = _grid(d, nodes)
    if eps is None:
        blocks_used: List[slice] = [slice(0, x.size)]
        masses: List[float] = [1.0]
        groups = np.zeros(x.size, dtype=np.int64)
    else:
        masses = [float(e) for e in eps]
        if len(masses) != len(d.segments) or any(e <= 0 for e in masses) or abs(sum(masses) - 1.0) > 1e-9:
            raise ParameterError("eps must have one positive entry per segment and sum to 1", eps=masses)
        blocks_used = blocks
        groups = seg
    v = np.real(p.value(x)).astype(float)
    k = _kernel(x, w)

    def objective(q: FloatArray) -> float:
        return float(v @ q - q @ k @ q)

    def gradient(q: FloatArray) -> FloatArray:
        return np.asarray(v - 2.0 * k @ q, dtype=float)

    q = np.concatenate([np.full(sl.stop - sl.start, z / (sl.stop - sl.start)) for sl, z in zip(blocks_used, masses)])
    y = q.copy()
    t = 1.0
    step = 1.0 / (2.0 * float(np.max(np.abs(k).sum(axis=1))))
    f_q = objective(q)
    it = 0
    converged = False
    for it in range(1, max_iter + 1):
        g = gradient(y)
        f_y = objective(y)
        while True:
            cand = project_product(y - step * g, blocks_used, masses)
            diff = cand - y
            if objective(cand) <= f_y + g @ diff + 0.5 / step * diff @ diff + 1e-15:
                break
            step *= 0.5
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        f_cand = objective(cand)
        if f_cand > f_q:
            # restart momentum
            y, t = q.copy(), 1.0
            continue
        y = cand + ((t - 1.0) / t_next) * (cand - q)
        change = float(np.max(np.abs(cand - q)))
        q, f_q, t = cand, f_cand, t_next
        step *= 1.5
        if change < tol:
            converged = True
            break

    polished, mult = _kkt_polish(v, k, q, groups, masses)
    if mult.size and objective(polished) <= f_q:
        q, f_q = polished, objective(polished)
        converged = True
    grad = gradient(q)
    if not mult.size:
        mult = np.array([float(np.min(grad[groups == gi])) for gi in range(len(masses))])
    # projected gradient norm on the support
    support = q > SUPPORT_THRESHOLD
    gnorm = float(np.max(np.abs(grad[support] - mult[groups[support]]))) if np.any(support) else float("nan")

    if logger is not None:
        meta = {"iterations": it, "objective": f_q, "gradient_norm": gnorm, "nodes": int(x.size)}
        if converged:
            logger.debug("grid oracle converged", meta)
        else:
            logger.warn("grid oracle reached max iterations", meta)
    return GridMeasure(
        nodes=x,
        masses=q,
        widths=w,
        segment=seg,
        objective=f_q,
        gradient_norm=gnorm,
        iterations=it,
        converged=converged,
        multipliers=np.asarray(mult, dtype=float),
    )
