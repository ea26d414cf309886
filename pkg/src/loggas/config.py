"""Configuration models and validation for log-gas runs."""

from __future__ import annotations

import math
from typing import Any, List, Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from src.loggas.potential import AnalyticPotential, Domain, LogCharge, PotentialPiece


class LogChargeConfig(BaseModel):
    """A term ``charge * log(location - x)`` attached to one order of the potential."""

    model_config = {"extra": "forbid"}

    re: float = Field(description="Real part of the charge location")
    im: float = Field(default=0.0, description="Imaginary part of the charge location")
    charge_re: float = Field(default=1.0, description="Real part of the charge")
    charge_im: float = Field(default=0.0, description="Imaginary part of the charge")
    order: int = Field(default=1, ge=0, description="Power of 1/N multiplying this term")

    def to_charge(self) -> LogCharge:
        return LogCharge(complex(self.re, self.im), complex(self.charge_re, self.charge_im))


class PotentialOrderConfig(BaseModel):
    model_config = {"extra": "forbid"}

    poly: List[float] = Field(default_factory=list, description="Ascending coefficients of V^{k}")


class PotentialConfig(BaseModel):
    """
    Potential V = sum_k N^{-k} V^{k}.

    ``poly`` is the leading polynomial; ``orders`` lists V^{1}, V^{2}, ...;
    ``log_charges`` are added at the order they declare.
    """

    model_config = {
        "extra": "forbid",
        "json_schema_extra": {"examples": [{"poly": [0.0, 0.0, -2.0, 0.0, 0.25]}]},
    }

    poly: List[float] = Field(description="Ascending coefficients of V^{0}")
    orders: List[PotentialOrderConfig] = Field(default_factory=list, description="Subleading pieces V^{1}, V^{2}, ...")
    log_charges: List[LogChargeConfig] = Field(default_factory=list, description="Logarithmic charges")

    @field_validator("poly")
    @classmethod
    def validate_poly(cls, v: List[float]) -> List[float]:
        if not v:
            raise ValueError("potential.poly needs at least one coefficient")
        if not all(math.isfinite(c) for c in v):
            raise ValueError("potential.poly coefficients must be finite")
        return v

    def build(self) -> AnalyticPotential:
        pieces = [PotentialPiece(poly=tuple(self.poly))]
        pieces += [PotentialPiece(poly=tuple(o.poly)) for o in self.orders]
        potential = AnalyticPotential(tuple(pieces))
        for q in self.log_charges:
            potential = potential.with_piece(q.order, PotentialPiece(charges=(q.to_charge(),)))
        return potential


class DomainConfig(BaseModel):
    model_config = {"extra": "forbid"}

    segments: List[List[float]] = Field(description="Ordered disjoint segments [[lo, hi], ...]")

    @field_validator("segments")
    @classmethod
    def validate_segments(cls, v: List[List[float]]) -> List[List[float]]:
        if not v:
            raise ValueError("domain.segments must not be empty")
        for pair in v:
            if len(pair) != 2 or not pair[0] < pair[1]:
                raise ValueError(f"Invalid segment {pair}: expected [lo, hi] with lo < hi")
        for left, right in zip(v, v[1:]):
            if not left[1] < right[0]:
                raise ValueError("domain.segments must be disjoint and increasing")
        return v

    def build(self) -> Domain:
        return Domain.from_pairs(self.segments)


class SolverConfig(BaseModel):
    """Equilibrium-measure solver settings."""

    model_config = {"extra": "forbid"}

    tolerance: float = Field(default=1e-10, gt=0, description="Residual norm accepted by the root finder")
    contour_nodes: int = Field(default=256, ge=32, description="Trapezoid nodes per ellipse")
    cut_nodes: int = Field(default=256, ge=32, description="Gauss-Chebyshev nodes per cut")
    max_passes: int = Field(default=4, ge=1, description="Edge reclassification passes")
    grid_nodes: int = Field(default=400, ge=50, description="Grid-oracle nodes per segment used for initialization")
    margin_threshold: float = Field(default=1e-3, ge=0, description="Smallest accepted offcritical margin")
    criticality: Literal["warn", "error"] = Field(default="warn", description="Policy when the margin is too small")


class ExpansionConfig(BaseModel):
    model_config = {"extra": "forbid"}

    k_max: int = Field(default=1, ge=0, le=2, description="Highest order N^{-k} of the expansion (memory grows like nodes^(k_max+1))")
    s_nodes: int = Field(default=16, ge=4, description="Gauss-Legendre nodes of the interpolation in s")
    eps_step: float = Field(default=2e-3, gt=0, lt=0.1, description="Step of the filling-fraction stencil")
    contour_nodes: int = Field(default=192, ge=32, description="Trapezoid nodes per level of the recursion contours")


class SamplerConfig(BaseModel):
    """Metropolis chain settings."""

    model_config = {"extra": "forbid"}

    steps: int = Field(default=20000, gt=0, description="Sweeps per chain, burn-in included")
    burn_in: int = Field(default=2000, ge=0, description="Sweeps discarded at the start of each chain")
    step_size: float = Field(default=0.2, gt=0, description="Initial random-walk step")
    chains: int = Field(default=4, ge=1, description="Independent chains")
    thin: int = Field(default=10, ge=1, description="Keep one sweep out of this many")
    fixed_filling: Optional[List[int]] = Field(default=None, description="Particle count per segment")

    @model_validator(mode="after")
    def validate_burn_in(self) -> "SamplerConfig":
        if self.burn_in >= self.steps:
            raise ValueError(f"burn_in ({self.burn_in}) must be < steps ({self.steps})")
        return self


class OutputConfig(BaseModel):
    model_config = {"extra": "forbid"}

    out: Optional[str] = Field(default=None, description="JSON report path")
    csv: Optional[str] = Field(default=None, description="CSV table path")
    log_file: Optional[str] = Field(default=None, description="JSON-lines log file")


class RunConfig(BaseModel):
    """
    Full run configuration.

    Validates:
    - beta > 0 and N >= 1
    - eps (fixed filling) has one positive entry per segment and sums to 1
    - sampler.fixed_filling matches the segment count and sums to N
    """

    model_config = {
        "extra": "forbid",
        "json_schema_extra": {
            "examples": [
                {
                    "potential": {"poly": [0.0, 0.0, 0.5]},
                    "domain": {"segments": [[-3.0, 3.0]]},
                    "beta": 2.0,
                    "filling": "optimal",
                    "N": 40,
                    "seed": 7,
                }
            ]
        },
    }

    potential: PotentialConfig
    domain: DomainConfig
    beta: float = Field(default=2.0, gt=0, description="Inverse temperature")
    filling: Literal["fixed", "optimal"] = Field(default="optimal", description="Filling-fraction mode")
    eps: Optional[List[float]] = Field(default=None, description="Filling fractions for the fixed mode")
    N: int = Field(default=40, ge=1, description="Number of particles")
    seed: Optional[int] = Field(default=None, description="Random seed for reproducibility")
    solver: SolverConfig = Field(default_factory=SolverConfig)
    expansion: ExpansionConfig = Field(default_factory=ExpansionConfig)
    sampler: SamplerConfig = Field(default_factory=SamplerConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)

    @model_validator(mode="after")
    def validate_filling(self) -> "RunConfig":
        n_seg = len(self.domain.segments)
        if self.filling == "fixed":
            if self.eps is None:
                raise ValueError("filling = 'fixed' requires eps")
        if self.eps is not None:
            if len(self.eps) != n_seg:
                raise ValueError(f"eps needs {n_seg} entries, got {len(self.eps)}")
            if any(e <= 0 for e in self.eps):
                raise ValueError("eps entries must be positive")
            if abs(sum(self.eps) - 1.0) > 1e-9:
                raise ValueError(f"eps must sum to 1, got {sum(self.eps)}")
        ff = self.sampler.fixed_filling
        if ff is not None:
            if len(ff) != n_seg:
                raise ValueError(f"sampler.fixed_filling needs {n_seg} entries")
            if sum(ff) != self.N or any(c < 0 for c in ff):
                raise ValueError(f"sampler.fixed_filling must be nonnegative and sum to N={self.N}")
        return self

    def build_potential(self) -> AnalyticPotential:
        return self.potential.build()

    def build_domain(self) -> Domain:
        return self.domain.build()

    def provenance(self) -> dict[str, Any]:
        return self.model_dump(mode="json")
