"""Exception hierarchy for the log-gas toolkit.

Every failure raised by library code derives from ``LogGasError``. The CLI maps
the ``exit_code`` class attribute onto the process exit status: 2 for invalid
input, 3 for numerical failures.
"""

from __future__ import annotations

from typing import Any, Dict, List, Optional, Sequence, Tuple


class LogGasError(Exception):
    """Base class for all toolkit errors."""

    exit_code: int = 3

    def __init__(self, message: str, **details: Any) -> None:
        super().__init__(message)
        self.details: Dict[str, Any] = details

    def to_dict(self) -> Dict[str, Any]:
        """Serializable view used in CLI diagnostics."""
        return {
            "error": type(self).__name__,
            "message": str(self),
            "details": {k: v for k, v in self.details.items()},
        }


class ValidationFailure(LogGasError):
    """Input rejected before any numerics ran."""

    exit_code = 2


class NumericalFailure(LogGasError):
    """A numerical stage could not deliver a result within tolerance."""

    exit_code = 3


class SingularityError(NumericalFailure):
    """Evaluation at a log-charge location."""


class InvalidChargeError(ValidationFailure):
    """A log charge placed on the domain."""


class DomainError(ValidationFailure):
    """Point outside the region where an operation is defined."""


class ParameterError(ValidationFailure):
    """Inconsistent numerical parameters (e.g. Im tau not positive definite)."""


class DimensionError(ValidationFailure):
    """Requested dimension beyond what an oracle supports."""


class SolverError(NumericalFailure):
    """Root finding did not converge."""

    def __init__(self, message: str, residual_trace: Optional[Sequence[float]] = None, **details: Any) -> None:
        super().__init__(message, **details)
        self.residual_trace: List[float] = list(residual_trace or [])
        self.details["residual_trace"] = self.residual_trace


class PhaseAssumptionError(NumericalFailure):
    """Negative density on a cut: the assumed cut structure is wrong."""


class CriticalityError(NumericalFailure):
    """Off-critical margin below the configured threshold."""


class AmbiguityError(NumericalFailure):
    """The optimal filling fractions are not isolated."""


class AccuracyError(NumericalFailure):
    """Quadrature under-resolved for the requested evaluation."""


class DegenerateCurveError(NumericalFailure):
    """Singular A-period system for the holomorphic basis."""


class InterpolationError(NumericalFailure):
    """Off-criticality lost along an interpolation path."""

    def __init__(self, message: str, s: float, **details: Any) -> None:
        super().__init__(message, s=s, **details)
        self.s = s


class DependencyError(NumericalFailure):
    """A derivative tensor needed by a correction operator is missing."""

    def __init__(self, message: str, missing: Tuple[int, int], **details: Any) -> None:
        super().__init__(message, missing=list(missing), **details)
        self.missing = missing


class ContourError(NumericalFailure):
    """A contour cannot separate the cuts from a test-function singularity."""


class HomotopyError(NumericalFailure):
    """An integration path crosses a cut."""


class TuningError(NumericalFailure):
    """Sampler step size could not be tuned (zero acceptance)."""
