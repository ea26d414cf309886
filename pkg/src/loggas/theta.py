"""Siegel theta functions with characteristics and the T^k correction operators.

    theta[mu; nu](v | tau) = sum_{m in Z^g} exp(i pi (m+mu).tau.(m+mu) + 2 i pi (m+mu).(v+nu))

Every quantity here is a truncated lattice sum. The truncation ellipsoid is
centered on the dominant lattice point, which depends on Im v.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Protocol, Sequence, Tuple

import numpy as np
import numpy.typing as npt

from src.loggas.errors import DependencyError, ParameterError

ComplexArray = npt.NDArray[np.complex128]
FloatArray = npt.NDArray[np.float64]

DEFAULT_TOL = 1e-14


class TensorSource(Protocol):
    """Anything carrying the epsilon-derivative tensors of one free-energy coefficient."""

    @property
    def k(self) -> int: ...

    @property
    def derivatives(self) -> Mapping[int, npt.NDArray[np.generic]]: ...


@dataclass(frozen=True, eq=False)
class ThetaParams:
    """Inputs of theta[mu; nu](v | tau)."""

    tau: ComplexArray
    v: ComplexArray
    mu: FloatArray
    nu: FloatArray

    def __post_init__(self) -> None:
        tau = np.atleast_2d(np.asarray(self.tau, dtype=np.complex128))
        g = tau.shape[0]
        if tau.shape != (g, g) or g < 1:
            raise ParameterError(f"tau must be a square g x g matrix, got shape {tau.shape}")
        if not np.allclose(tau, tau.T, atol=1e-10, rtol=0.0):
            raise ParameterError("tau must be symmetric")
        eig = np.linalg.eigvalsh(0.5 * (tau.imag + tau.imag.T))
        if eig.min() <= 0.0:
            raise ParameterError("Im tau must be positive definite", min_eigenvalue=float(eig.min()))
        object.__setattr__(self, "tau", tau)
        for name in ("v", "mu", "nu"):
            arr = np.atleast_1d(np.asarray(getattr(self, name)))
            if arr.shape != (g,):
                raise ParameterError(f"{name} must have length g={g}, got shape {arr.shape}")
            dtype = np.complex128 if name == "v" else np.float64
            object.__setattr__(self, name, arr.astype(dtype))

    @classmethod
    def build(
        cls,
        tau: npt.ArrayLike,
        v: Optional[npt.ArrayLike] = None,
        mu: Optional[npt.ArrayLike] = None,
        nu: Optional[npt.ArrayLike] = None,
    ) -> "ThetaParams":
        t = np.atleast_2d(np.asarray(tau, dtype=np.complex128))
        g = t.shape[0]
        zeros = np.zeros(g)
        return cls(
            tau=t,
            v=np.asarray(v if v is not None else zeros, dtype=np.complex128),
            mu=np.asarray(mu if mu is not None else zeros, dtype=float),
            nu=np.asarray(nu if nu is not None else zeros, dtype=float),
        )

    @property
    def g(self) -> int:
        return int(self.tau.shape[0])

    def replace(self, **changes: npt.ArrayLike) -> "ThetaParams":
        kwargs: Dict[str, npt.ArrayLike] = {"tau": self.tau, "v": self.v, "mu": self.mu, "nu": self.nu}
        kwargs.update(changes)
        return ThetaParams.build(**kwargs)


@dataclass(frozen=True, eq=False)
class DerivTensorSet:
    """Gradient tensors grad_v^{(x)j} theta, keyed by order j (j = 0 is theta itself)."""

    tensors: Dict[int, ComplexArray] = field(default_factory=dict)

    def __getitem__(self, j: int) -> ComplexArray:
        return self.tensors[j]


def _lattice(params: ThetaParams, extra: int = 0, tol: float = DEFAULT_TOL) -> FloatArray:
    """Points m + mu retained in the truncated sum, one row per point."""
    im_tau = 0.5 * (params.tau.imag + params.tau.imag.T)
    lam_min = float(np.linalg.eigvalsh(im_tau).min())
    # |term| = exp(-pi X.ImT.X - 2 pi X.Im v); maximal at X = -ImT^{-1} Im v
    center = -np.linalg.solve(im_tau, params.v.imag)
    radius = math.sqrt(math.log(1.0 / tol) / (math.pi * lam_min)) + 2.0
    radius += math.sqrt(max(extra, 0) / (math.pi * lam_min))
    lo = np.floor(center - params.mu - radius).astype(int)
    hi = np.ceil(center - params.mu + radius).astype(int)
    ranges = [range(int(a), int(b) + 1) for a, b in zip(lo, hi)]
    pts = np.array(list(itertools.product(*ranges)), dtype=float) + params.mu
    keep = np.linalg.norm(pts - center, axis=1) <= radius
    return pts[keep]


def _terms(params: ThetaParams, pts: FloatArray) -> ComplexArray:
    quad = np.einsum("mi,ij,mj->m", pts, params.tau, pts)
    lin = pts @ (params.v + params.nu)
    return np.exp(1j * math.pi * quad + 2j * math.pi * lin)


def theta(params: ThetaParams, tol: float = DEFAULT_TOL) -> complex:
    """Value of the Siegel theta function with characteristics."""
    pts = _lattice(params, tol=tol)
    return complex(np.sum(_terms(params, pts)))


def theta_grad(params: ThetaParams, j_max: int, tol: float = DEFAULT_TOL) -> DerivTensorSet:
    """Tensors grad_v^{(x)j} theta for j = 0..j_max by term-wise differentiation."""
    pts = _lattice(params, extra=2 * j_max, tol=tol)
    terms = _terms(params, pts)
    factor = 2j * math.pi * pts
    out: Dict[int, ComplexArray] = {}
    weighted = terms.astype(np.complex128)
    for j in range(j_max + 1):
        out[j] = np.asarray(np.sum(weighted, axis=0), dtype=np.complex128)
        weighted = weighted[..., None] * factor.reshape((factor.shape[0],) + (1,) * j + (factor.shape[1],))
    return DerivTensorSet(out)


def _contract(tensor: npt.NDArray[np.generic], pts: FloatArray) -> ComplexArray:
    """tensor . X^{(x)l} for every row X of pts."""
    t = np.asarray(tensor, dtype=np.complex128)
    out = np.broadcast_to(t, (pts.shape[0],) + t.shape).copy()
    for _ in range(t.ndim):
        out = np.einsum("m...i,mi->m...", out, pts)
    return out


def _series_exp(a: Sequence[ComplexArray], k_max: int) -> List[ComplexArray]:
    """Coefficients b_0..b_kmax of exp(sum_{n>=1} a_n h^n)."""
    b: List[ComplexArray] = [np.ones_like(a[0])]
    for k in range(1, k_max + 1):
        acc = np.zeros_like(b[0])
        for j in range(1, k + 1):
            acc = acc + j * a[j] * b[k - j]
        b.append(acc / k)
    return b


def correction_polynomials(
    tensors: Sequence[TensorSource], pts: FloatArray, k_max: int
) -> List[ComplexArray]:
    """T^k[X] for k = 0..k_max evaluated at every row X of ``pts``.

    T^k[X] collects, with the exponential combinatorics, products of
    (F^m)^{(l)} . X^{(x)l} / l! with l >= 1, m >= -2 and l + m >= 1 summing to k.

    Raises:
        DependencyError: a tensor (F^m)^{(l)} needed up to order k_max is absent.
    """
    by_k = {t.k: t for t in tensors}
    a: List[ComplexArray] = [np.zeros(pts.shape[0], dtype=np.complex128)]
    for n in range(1, k_max + 1):
        acc = np.zeros(pts.shape[0], dtype=np.complex128)
        for ell in range(1, n + 3):
            m = n - ell
            src = by_k.get(m)
            if src is None or ell not in src.derivatives:
                raise DependencyError(
                    f"Correction of order {n} needs derivative {ell} of F^{m}", missing=(m, ell)
                )
            acc = acc + _contract(src.derivatives[ell], pts) / math.factorial(ell)
        a.append(acc)
    return _series_exp(a, k_max)


def apply_T_operator(
    tensors: Sequence[TensorSource], params: ThetaParams, k_max: int, tol: float = DEFAULT_TOL
) -> List[complex]:
    """Values of T^k[grad_v / 2 i pi] theta for k = 0..k_max.

    Each grad_v / 2 i pi acting on a lattice term brings down (m + mu), so the
    operator is the lattice sum of T^k evaluated at m + mu.
    """
    pts = _lattice(params, extra=3 * k_max + 2, tol=tol)
    terms = _terms(params, pts)
    polys = correction_polynomials(tensors, pts, k_max)
    return [complex(np.sum(terms * p)) for p in polys]


def reduce_characteristic(values: npt.ArrayLike) -> FloatArray:
    """Fractional part in [0, 1): integer shifts of mu leave theta unchanged."""
    arr = np.asarray(values, dtype=float)
    return np.asarray(arr - np.floor(arr), dtype=float)


def quasi_period_factor(params: ThetaParams, m0: Sequence[int], n0: Sequence[int]) -> complex:
    """theta(v + m0 + tau n0) / theta(v)."""
    m = np.asarray(m0, dtype=float)
    n = np.asarray(n0, dtype=float)
    phase = 2 * math.pi * float(params.mu @ m)
    quad = complex(n @ params.tau @ n)
    lin = complex(n @ (params.v + params.nu))
    return complex(np.exp(1j * phase - 1j * math.pi * quad - 2j * math.pi * lin))


def tau_derivative(params: ThetaParams, h: int, h2: int, step: float = 1e-5) -> complex:
    """Central difference of theta in the entry tau_{h h2} (symmetric perturbation)."""
    e = np.zeros((params.g, params.g), dtype=np.complex128)
    e[h, h2] = step
    e[h2, h] = step
    plus = theta(params.replace(tau=params.tau + e))
    minus = theta(params.replace(tau=params.tau - e))
    return (plus - minus) / (2 * step)


def lattice_size(params: ThetaParams, tol: float = DEFAULT_TOL) -> int:
    return int(_lattice(params, tol=tol).shape[0])


def theta_pair(params: ThetaParams, shift: npt.ArrayLike) -> Tuple[complex, complex]:
    """(theta(v + shift), theta(v)) for theta-ratio assemblies."""
    shifted = params.replace(v=params.v + np.asarray(shift, dtype=np.complex128))
    return theta(shifted), theta(params)
