"""Potentials with a 1/N expansion: polynomial pieces plus logarithmic charges."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import numpy.typing as npt

from src.loggas.errors import InvalidChargeError, SingularityError, ValidationFailure

ComplexArray = npt.NDArray[np.complex128]
ArrayLike = Union[complex, float, Sequence[complex], npt.NDArray[np.generic]]

_SINGULAR_RADIUS = 1e-14


@dataclass(frozen=True)
class Segment:
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or not self.lo < self.hi:
            raise ValidationFailure(f"Invalid segment [{self.lo}, {self.hi}]")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= x <= self.hi + tol


@dataclass(frozen=True)
class Domain:
    """Ordered union of pairwise disjoint segments, one per cut."""

    segments: Tuple[Segment, ...]

    def __post_init__(self) -> None:
        if not self.segments:
            raise ValidationFailure("Domain needs at least one segment")
        for left, right in zip(self.segments, self.segments[1:]):
            if not left.hi < right.lo:
                raise ValidationFailure("Domain segments must be disjoint and increasing")

    @classmethod
    def from_pairs(cls, pairs: Sequence[Sequence[float]]) -> "Domain":
        return cls(tuple(Segment(float(lo), float(hi)) for lo, hi in pairs))

    @property
    def genus(self) -> int:
        return len(self.segments) - 1

    @property
    def hull(self) -> Tuple[float, float]:
        return self.segments[0].lo, self.segments[-1].hi

    def distance(self, z: complex) -> float:
        """Euclidean distance from a complex point to the union of segments."""
        best = math.inf
        for seg in self.segments:
            x = min(max(z.real, seg.lo), seg.hi)
            best = min(best, abs(z - x))
        return best

    def segment_index(self, x: float) -> Optional[int]:
        for h, seg in enumerate(self.segments):
            if seg.contains(x):
                return h
        return None

    def to_pairs(self) -> List[List[float]]:
        return [[s.lo, s.hi] for s in self.segments]


@dataclass(frozen=True)
class LogCharge:
    """Term ``charge * log(location - x)`` of a potential piece.

    When the location sits on the real axis left of everything it is attached
    to, the branch ``log(x - location) + i*pi`` is used so that the cut points
    away from the domain.
    """

    location: complex
    charge: complex
    left_branch: bool = False

    def _log(self, x: ComplexArray) -> ComplexArray:
        if self.left_branch:
            return np.log(x - self.location) + 1j * math.pi
        return np.log(self.location - x)

    def value(self, x: ComplexArray) -> ComplexArray:
        return self.charge * self._log(x)

    def derivative(self, x: ComplexArray, order: int) -> ComplexArray:
        if order == 0:
            return self.value(x)
        # d^m/dx^m log(z - x) = -(m-1)! (z - x)^(-m)
        return -self.charge * math.factorial(order - 1) * (self.location - x) ** (-order)


@dataclass(frozen=True)
class PotentialPiece:
    """Coefficient of N^{-k}: polynomial (ascending coefficients) plus log charges."""

    poly: Tuple[float, ...] = ()
    charges: Tuple[LogCharge, ...] = ()

    @property
    def is_zero(self) -> bool:
        return not any(c != 0 for c in self.poly) and not self.charges

    def value(self, x: ComplexArray) -> ComplexArray:
        out = np.zeros_like(x, dtype=np.complex128)
        if self.poly:
            out = out + np.polynomial.polynomial.polyval(x, np.asarray(self.poly, dtype=float))
        for q in self.charges:
            out = out + q.value(x)
        return out

    def derivative(self, x: ComplexArray, order: int) -> ComplexArray:
        if order == 0:
            return self.value(x)
        out = np.zeros_like(x, dtype=np.complex128)
        if len(self.poly) > order:
            coeffs = np.polynomial.polynomial.polyder(np.asarray(self.poly, dtype=float), order)
            out = out + np.polynomial.polynomial.polyval(x, coeffs)
        for q in self.charges:
            out = out + q.derivative(x, order)
        return out

    def scaled(self, factor: float) -> "PotentialPiece":
        return PotentialPiece(
            poly=tuple(factor * c for c in self.poly),
            charges=tuple(LogCharge(q.location, factor * q.charge, q.left_branch) for q in self.charges),
        )


@dataclass(frozen=True)
class AnalyticPotential:
    """V = sum_k N^{-k} V^{k}, each V^{k} a :class:`PotentialPiece`."""

    orders: Tuple[PotentialPiece, ...] = field(default_factory=lambda: (PotentialPiece(),))

    @classmethod
    def polynomial(cls, coeffs: Sequence[float]) -> "AnalyticPotential":
        return cls((PotentialPiece(poly=tuple(float(c) for c in coeffs)),))

    def piece(self, k: int) -> PotentialPiece:
        if 0 <= k < len(self.orders):
            return self.orders[k]
        return PotentialPiece()

    @property
    def max_order(self) -> int:
        return len(self.orders) - 1

    @property
    def leading_is_polynomial(self) -> bool:
        return not self.orders[0].charges

    def singular_points(self) -> List[complex]:
        return [q.location for piece in self.orders for q in piece.charges]

    def _check(self, x: ComplexArray) -> None:
        for z in self.singular_points():
            if np.any(np.abs(x - z) < _SINGULAR_RADIUS):
                raise SingularityError(f"Potential evaluated at log-charge location {z}")

    def value(self, x: ArrayLike, n_inverse: float = 0.0) -> ComplexArray:
        """Truncated series sum_k n_inverse^k V^{k}(x)."""
        return self.derivative(x, n_inverse, 0)

    def derivative(self, x: ArrayLike, n_inverse: float = 0.0, order: int = 1) -> ComplexArray:
        arr = np.asarray(x, dtype=np.complex128)
        self._check(arr)
        out = np.zeros_like(arr)
        for k, piece in enumerate(self.orders):
            if k > 0 and n_inverse == 0.0:
                break
            out = out + (n_inverse ** k) * piece.derivative(arr, order)
        return out

    def piece_derivative(self, k: int, x: ArrayLike, order: int = 1) -> ComplexArray:
        arr = np.asarray(x, dtype=np.complex128)
        self._check(arr)
        return self.piece(k).derivative(arr, order)

    def scaled(self, factor: float) -> "AnalyticPotential":
        return AnalyticPotential(tuple(p.scaled(factor) for p in self.orders))

    def with_piece(self, k: int, piece: PotentialPiece) -> "AnalyticPotential":
        pieces = list(self.orders) + [PotentialPiece()] * max(0, k + 1 - len(self.orders))
        base = pieces[k]
        n = max(len(base.poly), len(piece.poly))
        poly = tuple(
            (base.poly[i] if i < len(base.poly) else 0.0) + (piece.poly[i] if i < len(piece.poly) else 0.0)
            for i in range(n)
        )
        pieces[k] = PotentialPiece(poly=poly, charges=base.charges + piece.charges)
        return AnalyticPotential(tuple(pieces))

    def validate_against(self, domain: Domain) -> None:
        for z in self.singular_points():
            if domain.distance(z) <= 0.0:
                raise InvalidChargeError(f"Log charge at {z} lies on the domain")


def evaluate(p: AnalyticPotential, x: ArrayLike, n_inverse: float = 0.0) -> ComplexArray:
    return p.value(x, n_inverse)


def evaluate_derivative(p: AnalyticPotential, x: ArrayLike, n_inverse: float = 0.0, order: int = 1) -> ComplexArray:
    return p.derivative(x, n_inverse, order)


def perturb_with_logs(
    p: AnalyticPotential,
    points: Sequence[complex],
    charges: Sequence[complex],
    beta: float,
    domain: Optional[Domain] = None,
) -> AnalyticPotential:
    """Return V - (2/(beta N)) sum_j c_j log(x_j - .) with the shift stored at order 1.

    Raises:
        InvalidChargeError: a point lies on the domain, or lengths differ.
    """
    if len(points) != len(charges):
        raise InvalidChargeError("points and charges must have the same length")
    if not points:
        return p
    new: List[LogCharge] = []
    lo = domain.hull[0] if domain is not None else -math.inf
    for z, c in zip(points, charges):
        z = complex(z)
        if domain is not None and domain.distance(z) <= 0.0:
            raise InvalidChargeError(f"Charge location {z} lies on the domain")
        left = abs(z.imag) < 1e-300 and z.real < lo
        new.append(LogCharge(location=z, charge=complex(-2.0 * c / beta), left_branch=left))
    return p.with_piece(1, PotentialPiece(charges=tuple(new)))
