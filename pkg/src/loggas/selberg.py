"""Reference one-cut models: Selberg integrals, Barnes double Gamma, asymptotics.

The three normalized reference ensembles are

    ++  V = x^2/2 on R          (semicircle on [-2, 2])
    -+  V = x on R_+            (Marchenko-Pastur law on [0, 4], hard edge at 0)
    --  V = 0 on [-2, 2]        (arcsine law)

and ``+-`` is the mirror image of ``-+``. A model on an arbitrary segment
gamma = [lo, hi] is the affine image x = m + Delta*u with Delta = (hi - lo)/4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Tuple

import mpmath
import numpy as np
import numpy.typing as npt
from scipy.special import roots_jacobi

from src.loggas.errors import DomainError, ValidationFailure
from src.loggas.potential import AnalyticPotential

ComplexArray = npt.NDArray[np.complex128]

SIGNATURES = ("++", "-+", "+-", "--")

# Gauss-Jacobi exponents (a, b) of (1-u)^a (1+u)^b for each edge signature
_JACOBI = {"++": (0.5, 0.5), "-+": (0.5, -0.5), "+-": (-0.5, 0.5), "--": (-0.5, -0.5)}


def _check_signature(sig: str) -> str:
    if sig not in SIGNATURES:
        raise ValidationFailure(f"Unknown edge signature {sig!r}; expected one of {SIGNATURES}")
    return sig


def signature_of(lo_soft: bool, hi_soft: bool) -> str:
    """Signature string from edge softness (``+`` soft, ``-`` hard)."""
    return ("+" if lo_soft else "-") + ("+" if hi_soft else "-")


def _edge_sigma(x: ComplexArray, lo: float, hi: float) -> ComplexArray:
    # product of principal roots: cut exactly on [lo, hi], ~ x at infinity
    return np.sqrt(x - lo) * np.sqrt(x - hi)


@dataclass(frozen=True)
class ReferenceModel:
    """Reference potential with prescribed edge types on ``[lo, hi]``."""

    signature: str
    lo: float
    hi: float

    def __post_init__(self) -> None:
        _check_signature(self.signature)
        if not self.lo < self.hi:
            raise ValidationFailure(f"Reference segment needs lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def delta(self) -> float:
        return (self.hi - self.lo) / 4.0

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def anchor(self) -> float:
        """Point the support shrinks to: the hard edge if exactly one, else the midpoint."""
        if self.signature == "-+":
            return self.lo
        if self.signature == "+-":
            return self.hi
        return self.mid

    def shrunk(self, t: float) -> "ReferenceModel":
        a = self.anchor
        return ReferenceModel(self.signature, a + t * (self.lo - a), a + t * (self.hi - a))

    # -- potential -------------------------------------------------------
    def potential(self) -> AnalyticPotential:
        d, m = self.delta, self.mid
        if self.signature == "++":
            return AnalyticPotential.polynomial([m * m / (2 * d * d), -m / (d * d), 1.0 / (2 * d * d)])
        if self.signature == "-+":
            return AnalyticPotential.polynomial([-self.lo / d, 1.0 / d])
        if self.signature == "+-":
            return AnalyticPotential.polynomial([self.hi / d, -1.0 / d])
        return AnalyticPotential.polynomial([0.0])

    def vprime(self, x: ComplexArray) -> ComplexArray:
        x = np.asarray(x, dtype=np.complex128)
        d = self.delta
        if self.signature == "++":
            return (x - self.mid) / (d * d)
        if self.signature == "-+":
            return np.full_like(x, 1.0 / d)
        if self.signature == "+-":
            return np.full_like(x, -1.0 / d)
        return np.zeros_like(x)

    def vsecond(self, x: ComplexArray) -> ComplexArray:
        x = np.asarray(x, dtype=np.complex128)
        if self.signature == "++":
            return np.full_like(x, 1.0 / self.delta ** 2)
        return np.zeros_like(x)

    # -- leading order -----------------------------------------------------
    def w_minus1(self, x: ComplexArray) -> ComplexArray:
        """Stieltjes transform of the equilibrium measure."""
        x = np.asarray(x, dtype=np.complex128)
        d = self.delta
        s = _edge_sigma(x, self.lo, self.hi)
        if self.signature == "++":
            return (x - self.mid - s) / (2 * d * d)
        if self.signature == "-+":
            return (1.0 - s / (x - self.lo)) / (2 * d)
        if self.signature == "+-":
            return (s / (x - self.hi) - 1.0) / (2 * d)
        return 1.0 / s

    def w_minus1_prime(self, x: ComplexArray) -> ComplexArray:
        x = np.asarray(x, dtype=np.complex128)
        d = self.delta
        s = _edge_sigma(x, self.lo, self.hi)
        ds = s * 0.5 * (1.0 / (x - self.lo) + 1.0 / (x - self.hi))
        if self.signature == "++":
            return (1.0 - ds) / (2 * d * d)
        if self.signature == "-+":
            return -(ds / (x - self.lo) - s / (x - self.lo) ** 2) / (2 * d)
        if self.signature == "+-":
            return (ds / (x - self.hi) - s / (x - self.hi) ** 2) / (2 * d)
        return -ds / s ** 2

    def y(self, x: ComplexArray) -> ComplexArray:
        """V'/2 - W_1^{-1}; odd across the cut."""
        return 0.5 * self.vprime(x) - self.w_minus1(x)

    def w_order0(self, x: ComplexArray, beta: float) -> ComplexArray:
        """First subleading correction W_1^{0} of the one-point function."""
        x = np.asarray(x, dtype=np.complex128)
        c = 1.0 - 2.0 / beta
        s = _edge_sigma(x, self.lo, self.hi)
        shape = 1.0 / s - (x - self.mid) / s ** 2
        if self.signature == "++":
            return 0.5 * c * shape
        if self.signature == "--":
            return -0.5 * c * shape
        sign = -1.0 if self.signature == "-+" else 1.0
        return sign * c * self.delta / ((x - self.lo) * (x - self.hi))

    def w2_order0(self, x1: ComplexArray, x2: ComplexArray, beta: float) -> ComplexArray:
        """Universal one-cut two-point function, shared by all signatures."""
        x1 = np.asarray(x1, dtype=np.complex128)
        x2 = np.asarray(x2, dtype=np.complex128)
        s1 = _edge_sigma(x1, self.lo, self.hi)
        s2 = _edge_sigma(x2, self.lo, self.hi)
        num = x1 * x2 - (x1 + x2) * self.mid + self.lo * self.hi
        return (2.0 / beta) / (2.0 * (x1 - x2) ** 2) * (-1.0 + num / (s1 * s2))

    def density(self, x: npt.ArrayLike) -> npt.NDArray[np.float64]:
        x = np.asarray(x, dtype=float)
        if np.any((x <= self.lo) | (x >= self.hi)):
            raise DomainError("Reference density requested outside the open support")
        d = self.delta
        if self.signature == "++":
            return np.sqrt((self.hi - x) * (x - self.lo)) / (2 * math.pi * d * d)
        if self.signature == "-+":
            return np.sqrt((self.hi - x) / (x - self.lo)) / (2 * math.pi * d)
        if self.signature == "+-":
            return np.sqrt((x - self.lo) / (self.hi - x)) / (2 * math.pi * d)
        return 1.0 / (math.pi * np.sqrt((self.hi - x) * (x - self.lo)))

    def edge_constant(self) -> float:
        """Density prefactor S at the edges (pi * density / prod |x - alpha|^{rho/2})."""
        d = self.delta
        return {"++": 1.0 / (2 * d * d), "-+": 1.0 / (2 * d), "+-": 1.0 / (2 * d), "--": 1.0}[self.signature]

    def quadrature(self, n: int) -> Tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
        """Nodes and weights integrating against the equilibrium measure."""
        a, b = _JACOBI[self.signature]
        u, w = roots_jacobi(n, a, b)
        return self.mid + 2.0 * self.delta * u, w / np.sum(w)

    def log_potential(self, x: ComplexArray, n_nodes: int = 96) -> ComplexArray:
        """Analytic continuation of int log|x - xi| dmu(xi) for x away from the support."""
        x = np.asarray(x, dtype=np.complex128)
        nodes, weights = self.quadrature(n_nodes)
        diff = x[..., None] - nodes
        right = np.real(x) > self.mid
        logs = np.where(right[..., None], np.log(diff), np.log(-diff))
        return np.sum(weights * logs, axis=-1)

    def log_potential_shrink_rate(self, x: ComplexArray, n_nodes: int = 96) -> ComplexArray:
        """d/dt at t=1 of the log potential of ``self.shrunk(t)``."""
        x = np.asarray(x, dtype=np.complex128)
        nodes, weights = self.quadrature(n_nodes)
        a = self.anchor
        return np.sum(weights * (-(nodes - a)) / (x[..., None] - nodes), axis=-1)

    def potential_shrink_rate(self, x: ComplexArray) -> ComplexArray:
        """d/dt at t=1 of the reference potential of ``self.shrunk(t)``."""
        x = np.asarray(x, dtype=np.complex128)
        d = self.delta
        a = self.anchor
        if self.signature == "++":
            return -((x - a) ** 2) / (d * d)
        if self.signature == "-+":
            return -(x - a) / d
        if self.signature == "+-":
            return (x - a) / d
        return np.zeros_like(x)


def reference_potential(model: ReferenceModel) -> AnalyticPotential:
    return model.potential()


# ---------------------------------------------------------------------------
# Exact finite-N values
# ---------------------------------------------------------------------------


def _lg(x: mpmath.mpf) -> mpmath.mpf:
    return mpmath.loggamma(x)


def selberg_exact(signature: str, n: int, beta: float) -> mpmath.mpf:
    """log of the normalized reference partition function at size ``n``.

    Evaluated as log-Gamma sums in extended precision, so large ``n`` never
    overflows.
    """
    _check_signature(signature)
    if n < 1:
        raise ValidationFailure("selberg_exact needs n >= 1")
    with mpmath.workdps(40):
        b = mpmath.mpf(beta) / 2
        N = mpmath.mpf(n)
        if signature == "++":
            total = -(b * N * N / 2 + (1 - b) * N / 2) * mpmath.log(b * N) + (N / 2) * mpmath.log(2 * mpmath.pi)
            for j in range(1, n + 1):
                total += _lg(1 + j * b) - _lg(1 + b)
        elif signature in ("-+", "+-"):
            total = -(b * N * N + (1 - b) * N) * mpmath.log(b * N)
            for j in range(1, n + 1):
                total += _lg(1 + j * b) + _lg(1 + (j - 1) * b) - _lg(1 + b)
        else:
            total = (2 * b * N * N + (2 - 2 * b) * N) * mpmath.log(2)
            for j in range(1, n + 1):
                total += 2 * _lg(1 + (j - 1) * b) + _lg(1 + j * b) - _lg(2 + (n - 2 + j) * b) - _lg(1 + b)
        return +total


def reference_partition(model: ReferenceModel, n: int, beta: float) -> float:
    """log Z of the reference model on its own segment, by affine rescaling."""
    exponent = (beta / 2.0) * n * n + (1.0 - beta / 2.0) * n
    return float(exponent * math.log(model.delta) + selberg_exact(model.signature, n, beta))


# ---------------------------------------------------------------------------
# Barnes double Gamma
# ---------------------------------------------------------------------------

_ASYMPTOTIC_START = 30


@lru_cache(maxsize=None)
def _e_coefficients(b1: float, b2: float, kmax: int = 80) -> Tuple[mpmath.mpf, ...]:
    """E_k, k = -2..kmax, of 1/((1-e^{-b1 t})(1-e^{-b2 t})) = sum_k E_k t^k."""
    with mpmath.workdps(40):
        B1, B2 = mpmath.mpf(b1), mpmath.mpf(b2)
        bern = [mpmath.bernoulli(n) for n in range(kmax + 3)]
        out = []
        for k in range(-2, kmax + 1):
            acc = mpmath.mpf(0)
            for n_ in range(k + 3):
                m_ = k + 2 - n_
                acc += bern[n_] * bern[m_] * (-B1) ** n_ * (-B2) ** m_ / (mpmath.factorial(n_) * mpmath.factorial(m_))
            out.append(acc / (B1 * B2))
        return tuple(out)


def _asymptotic_part(y: mpmath.mpf, b1: float, b2: float) -> mpmath.mpf:
    e = _e_coefficients(b1, b2)
    ly = mpmath.log(y)
    total = -e[0] * (y * y * ly / 2 - 3 * y * y / 4) + e[1] * (y * ly - y) - e[2] * ly
    prev = mpmath.inf
    for k in range(1, len(e) - 2):
        term = mpmath.factorial(k - 1) * e[k + 2] * y ** (-k)
        if abs(term) > prev:
            break
        total += term
        prev = abs(term)
    return total


def _raw_log_gamma2(x: mpmath.mpf, b1: float, b2: float) -> mpmath.mpf:
    steps = max(0, int(math.ceil((_ASYMPTOTIC_START - float(x)) / b2)))
    total = _asymptotic_part(x + steps * b2, b1, b2)
    half_log_2pi = mpmath.log(2 * mpmath.pi) / 2
    lb1 = mpmath.log(b1)
    for j in range(steps):
        z = x + j * b2
        total += mpmath.loggamma(z / b1) - half_log_2pi - (mpmath.mpf(1) / 2 - z / b1) * lb1
    return total


def barnes_gamma2(x: float, b1: float, b2: float = 1.0) -> float:
    """log Gamma_2(x; b1, b2), normalized by Gamma_2(1) = 1.

    Raises:
        DomainError: x <= 0 or non-positive periods.
    """
    if x <= 0 or b1 <= 0 or b2 <= 0:
        raise DomainError("barnes_gamma2 needs x, b1, b2 > 0")
    with mpmath.workdps(40):
        val = _raw_log_gamma2(mpmath.mpf(x), b1, b2) - _raw_log_gamma2(mpmath.mpf(1), b1, b2)
        return float(val)


def chi_prime_zero(b1: float) -> float:
    """chi'(0; b1, 1) from the constant of the asymptotic expansion of log Gamma_2."""
    with mpmath.workdps(40):
        kappa = -_raw_log_gamma2(mpmath.mpf(1), b1, 1.0)
        return float(-kappa + mpmath.log(b1) / 2 - mpmath.log(2 * mpmath.pi) / 2)


# ---------------------------------------------------------------------------
# Large-N asymptotics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SelbergAsymptotics:
    """log Z = n2 N^2 + nlogn N log N + n1 N + logn log N + const + sum_j inverse[j-1] N^{-j}."""

    signature: str
    beta: float
    n2: float
    nlogn: float
    n1: float
    logn: float
    const: float
    inverse: Tuple[float, ...]

    def predict(self, n: float, through_log: bool = False) -> float:
        val = self.n2 * n * n + self.nlogn * n * math.log(n) + self.n1 * n + self.logn * math.log(n)
        if through_log:
            return val
        val += self.const
        for j, d in enumerate(self.inverse, start=1):
            val += d * n ** (-j)
        return val

    def as_dict(self) -> Dict[str, object]:
        return {
            "signature": self.signature,
            "beta": self.beta,
            "N^2": self.n2,
            "NlnN": self.nlogn,
            "N": self.n1,
            "lnN": self.logn,
            "const": self.const,
            "inverse_powers": list(self.inverse),
        }


def prefactor_exponent(signature: str, beta: float) -> float:
    """Coefficient e of log N."""
    b = beta / 2.0
    sig = _check_signature(signature)
    if sig == "++":
        return (3.0 + b + 1.0 / b) / 12.0
    if sig == "--":
        return (-1.0 + b + 1.0 / b) / 4.0
    return (b + 1.0 / b) / 6.0


def _leading_coefficients(signature: str, beta: float) -> Tuple[float, float, float, float]:
    b = beta / 2.0
    common = b * math.log(b) + math.log(2 * math.pi) - math.lgamma(1.0 + b)
    if signature == "++":
        return -0.75 * b, b, common - 0.5 - 0.5 * b, prefactor_exponent(signature, beta)
    if signature in ("-+", "+-"):
        return -1.5 * b, b, common - 1.0, prefactor_exponent(signature, beta)
    return 0.0, b, common - b + (b - 1.0) * math.log(2.0), prefactor_exponent(signature, beta)


@dataclass(frozen=True)
class LogPartitionExpansion:
    """Every term of the large-N expansion, including N^2 log N (which cancels)."""

    n2logn: float
    n2: float
    nlogn: float
    n1: float
    logn: float
    const: float
    inverse: Tuple[float, ...]


class _SeriesBuilder:
    """Accumulates log Gamma and log Gamma_2 expansions at x = p N + q."""

    def __init__(self, b1: float, n_inverse: int) -> None:
        self.b1 = b1
        self.n_inverse = n_inverse
        self.terms: Dict[str, mpmath.mpf] = {k: mpmath.mpf(0) for k in ("N2logN", "N2", "NlogN", "N", "logN", "const")}
        self.inverse = [mpmath.mpf(0)] * n_inverse
        # log Gamma_2(x) - (its Watson series in x) = -zeta_2'(0; 1)
        self.gamma2_offset = -(
            mpmath.mpf(chi_prime_zero(b1)) - mpmath.log(b1) / 2 + mpmath.log(2 * mpmath.pi) / 2
        )

    def add(self, key: str, value: mpmath.mpf) -> None:
        self.terms[key] += value

    def log_gamma(self, w: mpmath.mpf, p: mpmath.mpf, q: mpmath.mpf) -> None:
        lp = mpmath.log(p)
        self.add("NlogN", w * p)
        self.add("N", w * (p * lp - p))
        self.add("logN", w * (q - mpmath.mpf(1) / 2))
        self.add("const", w * ((q - mpmath.mpf(1) / 2) * lp + mpmath.log(2 * mpmath.pi) / 2))
        for k in range(1, self.n_inverse + 1):
            c = (-1) ** (k + 1) * mpmath.bernpoly(k + 1, q) / (k * (k + 1))
            self.inverse[k - 1] += w * c * p ** (-k)

    def log_gamma2(self, w: mpmath.mpf, p: mpmath.mpf, q: mpmath.mpf) -> None:
        e = _e_coefficients(self.b1, 1.0)
        # E_k(q): coefficients of e^{-qt} / ((1 - e^{-b1 t})(1 - e^{-t}))
        shifted = [
            sum(e[k - m + 2] * (-q) ** m / mpmath.factorial(m) for m in range(k + 3))
            for k in range(-2, self.n_inverse + 1)
        ]
        lp = mpmath.log(p)
        self.add("N2logN", -w * shifted[0] * p * p / 2)
        self.add("N2", w * shifted[0] * (3 * p * p / 4 - p * p * lp / 2))
        self.add("NlogN", w * shifted[1] * p)
        self.add("N", w * shifted[1] * (p * lp - p))
        self.add("logN", -w * shifted[2])
        self.add("const", w * (self.gamma2_offset - shifted[2] * lp))
        for k in range(1, self.n_inverse + 1):
            self.inverse[k - 1] += w * mpmath.factorial(k - 1) * shifted[k + 2] * p ** (-k)

    def gamma_sum(self, w: int, c0: mpmath.mpf, slope: mpmath.mpf) -> None:
        """sum_{j=1}^N log Gamma(c + j b) with c = c0 + slope N, telescoped through Gamma_2."""
        b1 = mpmath.mpf(self.b1)
        b = 1 / b1
        if slope == 0:
            self.add("const", w * mpmath.mpf(barnes_gamma2(float(b1 * c0 + 1), self.b1)))
        else:
            self.log_gamma2(mpmath.mpf(w), b1 * slope, b1 * c0 + 1)
        self.log_gamma2(mpmath.mpf(-w), 1 + b1 * slope, b1 * c0 + 1)
        lb1 = mpmath.log(b1)
        self.add("N", w * (mpmath.log(2 * mpmath.pi) / 2 + lb1 * (mpmath.mpf(1) / 2 - c0 - b / 2)))
        self.add("N2", -w * lb1 * (slope + b / 2))

    def build(self) -> LogPartitionExpansion:
        t = self.terms
        return LogPartitionExpansion(
            float(t["N2logN"]), float(t["N2"]), float(t["NlogN"]), float(t["N"]),
            float(t["logN"]), float(t["const"]), tuple(float(v) for v in self.inverse),
        )


def log_partition_expansion(signature: str, beta: float, n_inverse: int = 3) -> LogPartitionExpansion:
    """Expansion of :func:`selberg_exact` term by term.

    Products of Gamma(c + j beta/2) telescope into Barnes double Gammas with
    periods (2/beta, 1); those and the remaining log Gamma factors are then
    replaced by their asymptotic series.
    """
    sig = _check_signature(signature)
    if beta <= 0:
        raise ValidationFailure("log_partition_expansion needs beta > 0")
    with mpmath.workdps(40):
        b = mpmath.mpf(beta) / 2
        lb = mpmath.log(b)
        s = _SeriesBuilder(float(1 / b), n_inverse)
        if sig == "++":
            s.add("N2logN", -b / 2)
            s.add("N2", -b * lb / 2)
            s.add("NlogN", -(1 - b) / 2)
            s.add("N", -(1 - b) * lb / 2 + mpmath.log(2 * mpmath.pi) / 2)
            s.gamma_sum(1, mpmath.mpf(1), mpmath.mpf(0))
        elif sig in ("-+", "+-"):
            s.add("N2logN", -b)
            s.add("N2", -b * lb)
            s.add("NlogN", -(1 - b))
            s.add("N", -(1 - b) * lb)
            # prod Gamma(1 + (j-1)b) = prod Gamma(1 + jb) / Gamma(1 + Nb)
            s.gamma_sum(2, mpmath.mpf(1), mpmath.mpf(0))
            s.log_gamma(mpmath.mpf(-1), b, mpmath.mpf(1))
        else:
            s.add("N2", 2 * b * mpmath.log(2))
            s.add("N", (2 - 2 * b) * mpmath.log(2))
            s.gamma_sum(3, mpmath.mpf(1), mpmath.mpf(0))
            s.log_gamma(mpmath.mpf(-2), b, mpmath.mpf(1))
            s.gamma_sum(-1, 2 - 2 * b, b)
        s.add("N", -mpmath.loggamma(1 + b))
        return s.build()


@lru_cache(maxsize=None)
def selberg_asymptotic(signature: str, beta: float, n_inverse: int = 3) -> SelbergAsymptotics:
    """Large-N coefficients of the reference log partition function.

    The growing terms are closed form; the constant and the 1/N^j tail come
    from :func:`log_partition_expansion`.
    """
    _check_signature(signature)
    n2, nlogn, n1, logn = _leading_coefficients(signature, beta)
    series = log_partition_expansion(signature, beta, n_inverse)
    return SelbergAsymptotics(signature, beta, n2, nlogn, n1, logn, series.const, series.inverse)


def reference_log_partition_series(
    model: ReferenceModel, beta: float, mass: float, k_max: int
) -> Dict[int, float]:
    """Coefficients of N^{-k}, k = -2..k_max, of log Z for ``mass * N`` particles.

    The N log N and log N pieces are returned separately under keys ``"NlogN"``
    and ``"logN"`` by :func:`reference_log_terms`; here only the regular series.
    """
    asym = selberg_asymptotic(model.signature, beta)
    b = beta / 2.0
    lm = math.log(mass)
    ld = math.log(model.delta)
    series: Dict[int, float] = {
        -2: asym.n2 * mass * mass + b * mass * mass * ld,
        -1: asym.n1 * mass + asym.nlogn * mass * lm + (1.0 - b) * mass * ld,
        0: asym.const + asym.logn * lm,
    }
    for j in range(1, k_max + 1):
        d = asym.inverse[j - 1] if j - 1 < len(asym.inverse) else 0.0
        series[j] = d * mass ** (-j)
    return {k: v for k, v in series.items() if k <= k_max}


def reference_log_terms(signature: str, beta: float) -> Tuple[float, float]:
    """(N log N, log N) coefficients for one cut of any mass."""
    return beta / 2.0, prefactor_exponent(signature, beta)


def reference_w1_coeffs(model: ReferenceModel, order: int, beta: float = 2.0) -> "ReferenceEvaluator":
    if order not in (-1, 0):
        raise ValidationFailure("reference_w1_coeffs supports orders -1 and 0")
    return ReferenceEvaluator(model, order, beta)


@dataclass(frozen=True)
class ReferenceEvaluator:
    model: ReferenceModel
    order: int
    beta: float

    def __call__(self, x: ComplexArray) -> ComplexArray:
        if self.order == -1:
            return self.model.w_minus1(x)
        return self.model.w_order0(x, self.beta)


def stirling_tail(k_max: int) -> List[float]:
    """B_{m+1}/(m(m+1)) for m = 1..k_max: the 1/x^m tail of log Gamma(x)."""
    return [float(mpmath.bernoulli(m + 1)) / (m * (m + 1)) for m in range(1, k_max + 1)]
