"""Brute-force oracles: nested adaptive quadrature of the N-particle integral (N <= 4)
and moment-determinant orthogonal polynomials.

The integrand is symmetric, so the integral over A^N is computed as N! times
the ordered sector, split by how many particles sit on each segment:

    Z = sum_{n_0 + ... + n_g = N} N! / prod n_h! * Z_{fixed}(n),
    Z_{fixed}(n) = prod n_h! * (ordered integral with n_h particles on segment h).
"""

from __future__ import annotations

import itertools
import math
from typing import Callable, List, Optional, Sequence, Tuple

import mpmath
import numpy as np
import numpy.typing as npt
from scipy import integrate

from src.logging.json_logger import JSONLogger
from src.loggas.errors import DimensionError, ParameterError
from src.loggas.potential import AnalyticPotential, Domain

FloatArray = npt.NDArray[np.float64]
Observable = Callable[[FloatArray], float]

MAX_PARTICLES = 4
QUAD_OPTS = {"epsabs": 0.0, "epsrel": 1e-11, "limit": 200}


def _compositions(n: int, parts: int) -> List[Tuple[int, ...]]:
    return [c for c in itertools.product(range(n + 1), repeat=parts) if sum(c) == n]


def _integrand(
    p: AnalyticPotential, n: int, beta: float, observable: Optional[Observable]
) -> Callable[..., float]:
    weight = 0.5 * beta * n
    n_inv = 1.0 / n

    def f(*xs: float) -> float:
        lam = np.asarray(xs, dtype=float)
        diffs = np.abs(lam[:, None] - lam[None, :])[np.triu_indices(n, 1)]
        val = math.exp(-weight * float(np.sum(np.real(p.value(lam, n_inv))))) * float(np.prod(diffs ** beta))
        if observable is not None:
            val *= observable(lam)
        return val

    return f


def _ordered_integral(
    p: AnalyticPotential, d: Domain, counts: Sequence[int], beta: float, observable: Optional[Observable]
) -> float:
    """Integral over y_1 < ... < y_{n_h} in every segment h (variables innermost first)."""
    n = int(sum(counts))
    ranges: List[Callable[..., Tuple[float, float]]] = []
    for seg, c in zip(d.segments, counts):
        for a in range(c):
            if a < c - 1:
                ranges.append(lambda *args, lo=seg.lo: (lo, args[0]))
            else:
                ranges.append(lambda *args, lo=seg.lo, hi=seg.hi: (lo, hi))
    val, _ = integrate.nquad(_integrand(p, n, beta, observable), ranges, opts=QUAD_OPTS)
    return float(val)


def _check_size(n: int) -> None:
    if n < 1:
        raise ParameterError("N must be >= 1", N=n)
    if n > MAX_PARTICLES:
        raise DimensionError(f"Quadrature oracle refuses N > {MAX_PARTICLES}", N=n)


def fixed_filling_quadrature(p: AnalyticPotential, d: Domain, counts: Sequence[int], beta: float) -> float:
    """log Z with counts[h] particles restricted to segment h (labelled particles, no 1/N!)."""
    n = int(sum(counts))
    _check_size(n)
    if len(counts) != len(d.segments) or any(c < 0 for c in counts):
        raise ParameterError("counts need one nonnegative entry per segment", counts=list(counts))
    ordered = _ordered_integral(p, d, counts, beta, None)
    return math.log(ordered) + sum(math.lgamma(c + 1.0) for c in counts)


def partition_quadrature(
    p: AnalyticPotential,
    d: Domain,
    n: int,
    beta: float,
    logger: Optional[JSONLogger] = None,
) -> float:
    """log of the integral over A^N of prod |l_i - l_j|^beta exp(-(beta N/2) sum V(l_i)).

    Raises:
        DimensionError: N > 4.
    """
    _check_size(n)
    total = 0.0
    for counts in _compositions(n, len(d.segments)):
        total += _ordered_integral(p, d, counts, beta, None)
    log_z = math.log(total) + math.lgamma(n + 1.0)
    if logger is not None:
        logger.debug("quadrature partition function", {"N": n, "beta": beta, "log_z": log_z})
    return log_z


def unordered_quadrature(p: AnalyticPotential, d: Domain, n: int, beta: float) -> float:
    """log Z by integrating over the full product of segments, without using the symmetry."""
    _check_size(n)
    f = _integrand(p, n, beta, None)
    total = 0.0
    for segs in itertools.product(d.segments, repeat=n):
        ranges = [(s.lo, s.hi) for s in segs]
        val, _ = integrate.nquad(f, ranges, opts=QUAD_OPTS)
        total += float(val)
    return math.log(total)


def sum_decomposition(p: AnalyticPotential, d: Domain, n: int, beta: float) -> Tuple[float, float]:
    """(log of sum over fillings of N!/prod N_h! Z_fixed, log Z); the two agree exactly."""
    _check_size(n)
    terms = []
    for counts in _compositions(n, len(d.segments)):
        if any(c > 0 for c in counts):
            log_multi = math.lgamma(n + 1.0) - sum(math.lgamma(c + 1.0) for c in counts)
            terms.append(log_multi + fixed_filling_quadrature(p, d, counts, beta))
    lhs = float(np.logaddexp.reduce(np.array(terms)))
    return lhs, partition_quadrature(p, d, n, beta)


def quadrature_expectation(p: AnalyticPotential, d: Domain, n: int, beta: float, observable: Observable) -> float:
    """E[observable(l)] under the ensemble, for a symmetric observable."""
    _check_size(n)
    num = 0.0
    den = 0.0
    for counts in _compositions(n, len(d.segments)):
        num += _ordered_integral(p, d, counts, beta, observable)
        den += _ordered_integral(p, d, counts, beta, None)
    return num / den


def one_particle_cdf(p: AnalyticPotential, d: Domain, beta: float, xs: npt.ArrayLike) -> FloatArray:
    """CDF of the N = 1 ensemble, density proportional to exp(-(beta/2) V)."""

    def w(t: float) -> float:
        return math.exp(-0.5 * beta * float(np.real(p.value(t, 1.0))))

    masses = [integrate.quad(w, s.lo, s.hi, epsrel=1e-12)[0] for s in d.segments]
    total = sum(masses)
    out = []
    for x in np.atleast_1d(np.asarray(xs, dtype=float)):
        acc = 0.0
        for s, mass in zip(d.segments, masses):
            if x >= s.hi:
                acc += mass
            elif x > s.lo:
                acc += integrate.quad(w, s.lo, x, epsrel=1e-12)[0]
        out.append(acc / total)
    return np.asarray(out, dtype=float)


# ---------------------------------------------------------------------------
# Orthogonal polynomials from moments
# ---------------------------------------------------------------------------


def weight_moments(p: AnalyticPotential, d: Domain, scale: float, count: int, dps: int = 40) -> List[mpmath.mpf]:
    """m_k = int_A x^k exp(-scale V(x)) dx for k < count, in mpmath precision."""
    coeffs = [mpmath.mpf(c) for c in p.piece(0).poly]
    if p.max_order > 0 or p.piece(0).charges:
        raise ParameterError("weight_moments needs a polynomial potential")
    with mpmath.workdps(dps):
        def v(x: mpmath.mpf) -> mpmath.mpf:
            return mpmath.fsum(c * x ** j for j, c in enumerate(coeffs))

        out = []
        for k in range(count):
            val = mpmath.fsum(
                mpmath.quad(lambda x, k=k: x ** k * mpmath.exp(-scale * v(x)), [s.lo, 0.5 * (s.lo + s.hi), s.hi])
                for s in d.segments
            )
            out.append(+val)
    return out


def monic_orthopoly(p: AnalyticPotential, d: Domain, n: int, x: complex, scale: Optional[float] = None) -> complex:
    """Degree-n monic orthogonal polynomial for exp(-scale V) on A, by Hankel determinants.

    ``scale`` defaults to n, the weight of the beta = 2 ensemble with N = n
    whose expected characteristic polynomial it equals (Heine).
    """
    if n < 0:
        raise ParameterError("degree must be >= 0", n=n)
    if n == 0:
        return 1.0 + 0.0j
    s = float(n if scale is None else scale)
    moments = weight_moments(p, d, s, 2 * n)
    with mpmath.workdps(40):
        hankel = mpmath.matrix(n, n)
        for i in range(n):
            for j in range(n):
                hankel[i, j] = moments[i + j]
        rhs = mpmath.matrix(n, 1)
        for i in range(n):
            rhs[i] = -moments[i + n]
        # P_n(x) = x^n + sum_j a_j x^j with H a = -(m_n, ..., m_{2n-1})
        a = mpmath.lu_solve(hankel, rhs)
        z = mpmath.mpc(x)
        val = z ** n + mpmath.fsum(a[j] * z ** j for j in range(n))
    return complex(val)


def squared_norm(p: AnalyticPotential, d: Domain, n: int, scale: float) -> float:
    """h_n = det H_{n+1} / det H_n for the weight exp(-scale V)."""
    moments = weight_moments(p, d, scale, 2 * n + 2)
    with mpmath.workdps(40):
        def det(size: int) -> mpmath.mpf:
            if size == 0:
                return mpmath.mpf(1)
            mat = mpmath.matrix(size, size)
            for i in range(size):
                for j in range(size):
                    mat[i, j] = moments[i + j]
            return mpmath.det(mat)

        return float(det(n + 1) / det(n))
