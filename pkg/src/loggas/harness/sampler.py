"""Metropolis sampler of the beta-ensemble on a union of segments.

Target density on A^N:

    prod_{i<j} |l_i - l_j|^beta * exp(-(beta N / 2) sum_i V(l_i))

Single-particle random-walk moves are swept over all particles. Chains run
side by side as rows of one array, each driven by its own generator, so a
chain's trajectory depends only on (seed, chain index).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import numpy.typing as npt

from src.logging.json_logger import JSONLogger
from src.loggas.config import RunConfig
from src.loggas.errors import ParameterError, TuningError
from src.loggas.potential import AnalyticPotential, Domain
from src.util.seed import chain_generators

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]

TUNE_WINDOW = 50
TARGET_ACCEPTANCE = (0.25, 0.35)
BINARY_HEADER = "<qdq"


@dataclass(frozen=True)
class ChainConfig:
    """Settings of one sampling run (all chains share them)."""

    N: int
    beta: float
    steps: int
    burn_in: int
    step_size: float
    seed: int
    chains: int = 1
    thin: int = 1
    fixed_filling: Optional[Tuple[int, ...]] = None

    def __post_init__(self) -> None:
        if self.N < 1 or self.beta <= 0:
            raise ParameterError("ChainConfig needs N >= 1 and beta > 0", N=self.N, beta=self.beta)
        if not 0 <= self.burn_in < self.steps:
            raise ParameterError("ChainConfig needs steps > burn_in >= 0", steps=self.steps, burn_in=self.burn_in)
        if self.step_size <= 0 or self.chains < 1 or self.thin < 1:
            raise ParameterError("step_size, chains and thin must be positive")
        if self.fixed_filling is not None:
            if sum(self.fixed_filling) != self.N or any(c < 0 for c in self.fixed_filling):
                raise ParameterError("fixed_filling must be nonnegative and sum to N", fixed_filling=list(self.fixed_filling))

    @classmethod
    def from_run(cls, cfg: RunConfig, seed: int) -> "ChainConfig":
        s = cfg.sampler
        return cls(
            N=cfg.N,
            beta=cfg.beta,
            steps=s.steps,
            burn_in=s.burn_in,
            step_size=s.step_size,
            seed=seed,
            chains=s.chains,
            thin=s.thin,
            fixed_filling=tuple(s.fixed_filling) if s.fixed_filling is not None else None,
        )


@dataclass(eq=False)
class SampleBatch:
    """Kept configurations of every chain, chain-major, with diagnostics."""

    configurations: FloatArray
    chain: IntArray
    acceptance_rate: float
    chain_acceptance: FloatArray
    step_sizes: FloatArray
    crossings: IntArray
    beta: float
    segment_bounds: FloatArray
    rng_trace: Dict[str, Any] = field(default_factory=dict)

    @property
    def N(self) -> int:
        return int(self.configurations.shape[1])

    @property
    def count(self) -> int:
        return int(self.configurations.shape[0])

    def fillings(self) -> IntArray:
        """Particle count per segment for every kept configuration."""
        seg = segment_of(self.configurations, self.segment_bounds)
        n_seg = self.segment_bounds.shape[0]
        return np.stack([(seg == h).sum(axis=1) for h in range(n_seg)], axis=1).astype(np.int64)

    def per_chain(self) -> List[FloatArray]:
        return [self.configurations[self.chain == c] for c in range(int(self.chain.max()) + 1)]

    def diagnostics(self) -> Dict[str, Any]:
        return {
            "acceptance_rate": self.acceptance_rate,
            "chain_acceptance": self.chain_acceptance.tolist(),
            "step_sizes": self.step_sizes.tolist(),
            "segment_crossings": self.crossings.tolist(),
            "samples": self.count,
        }

    def write_binary(self, path: Union[str, Path]) -> Path:
        """Little-endian header {N: int64, beta: float64, count: int64}, then count * N float64 positions."""
        out = Path(path)
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "wb") as fh:
            fh.write(struct.pack(BINARY_HEADER, self.N, self.beta, self.count))
            fh.write(np.ascontiguousarray(self.configurations, dtype="<f8").tobytes())
        return out


def read_binary(path: Union[str, Path]) -> Tuple[float, FloatArray]:
    """(beta, configurations) from a file written by :meth:`SampleBatch.write_binary`."""
    raw = Path(path).read_bytes()
    size = struct.calcsize(BINARY_HEADER)
    n, beta, count = struct.unpack(BINARY_HEADER, raw[:size])
    data = np.frombuffer(raw[size:], dtype="<f8")
    if data.size != n * count:
        raise ParameterError("Sample file is truncated", expected=n * count, found=int(data.size))
    return float(beta), data.reshape(count, n).astype(float)


def segment_of(x: npt.ArrayLike, bounds: FloatArray) -> IntArray:
    """Segment index of each position, -1 outside the domain."""
    arr = np.asarray(x, dtype=float)
    idx = np.searchsorted(bounds[:, 0], arr, side="right") - 1
    safe = np.clip(idx, 0, bounds.shape[0] - 1)
    inside = (idx >= 0) & (arr <= bounds[safe, 1])
    return np.where(inside, idx, -1).astype(np.int64)


def _initial_positions(d: Domain, counts: Sequence[int]) -> FloatArray:
    """Evenly spaced interior points, counts[h] of them in segment h."""
    pts: List[FloatArray] = []
    for seg, c in zip(d.segments, counts):
        if c:
            pts.append(seg.lo + seg.length * (np.arange(c) + 0.5) / c)
    return np.concatenate(pts) if pts else np.zeros(0)


def _free_counts(d: Domain, n: int) -> List[int]:
    """Largest-remainder split of n particles proportional to segment lengths."""
    lengths = np.array([s.length for s in d.segments])
    share = n * lengths / lengths.sum()
    counts = np.floor(share).astype(int)
    for h in np.argsort(-(share - counts))[: n - int(counts.sum())]:
        counts[h] += 1
    return [int(c) for c in counts]


def sample(
    p: AnalyticPotential,
    d: Domain,
    cfg: ChainConfig,
    logger: Optional[JSONLogger] = None,
) -> SampleBatch:
    """Run ``cfg.chains`` Metropolis chains and keep every ``thin``-th sweep after burn-in.

    The step size of each chain is tuned toward 25-35% acceptance during burn-in
    and frozen afterwards. In fixed-filling mode a move leaving the particle's
    segment is rejected; in free mode only moves leaving the domain are.

    Raises:
        ParameterError: fixed_filling does not match the segment count.
        TuningError: some chain accepted no move after burn-in.
    """
    n, beta = cfg.N, cfg.beta
    bounds = np.array(d.to_pairs(), dtype=float)
    if cfg.fixed_filling is not None:
        if len(cfg.fixed_filling) != len(d.segments):
            raise ParameterError("fixed_filling needs one count per segment", segments=len(d.segments))
        counts = list(cfg.fixed_filling)
    else:
        counts = _free_counts(d, n)
    owner = np.repeat(np.arange(len(counts)), counts)
    rngs = chain_generators(cfg.seed, cfg.chains)
    n_chains = cfg.chains
    x = np.tile(_initial_positions(d, counts), (n_chains, 1))
    step = np.full(n_chains, cfg.step_size)
    n_inv = 1.0 / n

    def potential(z: FloatArray) -> FloatArray:
        return np.asarray(np.real(p.value(z, n_inv)), dtype=float)

    v_now = potential(x)
    weight = 0.5 * beta * n
    accepted_total = np.zeros(n_chains)
    accepted_window = np.zeros(n_chains)
    crossings = np.zeros(n_chains, dtype=np.int64)
    kept: List[FloatArray] = []
    rows = np.arange(n_chains)

    for sweep in range(cfg.steps):
        noise = np.stack([r.standard_normal(n) for r in rngs])
        unif = np.stack([r.random(n) for r in rngs])
        for i in range(n):
            prop = x[:, i] + step * noise[:, i]
            seg_new = segment_of(prop, bounds)
            valid = seg_new >= 0
            if cfg.fixed_filling is not None:
                valid &= seg_new == owner[i]
            safe = np.where(valid, prop, x[:, i])
            v_prop = potential(safe)
            diff_new = np.abs(safe[:, None] - x)
            diff_old = np.abs(x[:, i][:, None] - x)
            diff_new[:, i] = 1.0
            diff_old[:, i] = 1.0
            log_ratio = beta * np.sum(np.log(diff_new) - np.log(diff_old), axis=1) - weight * (v_prop - v_now[:, i])
            accept = valid & (np.log(unif[:, i]) < log_ratio)
            if cfg.fixed_filling is None:
                crossings += (accept & (seg_new != segment_of(x[:, i], bounds))).astype(np.int64)
            x[rows[accept], i] = prop[accept]
            v_now[rows[accept], i] = v_prop[accept]
            accepted_window += accept
            if sweep >= cfg.burn_in:
                accepted_total += accept
        if sweep < cfg.burn_in and (sweep + 1) % TUNE_WINDOW == 0:
            rate = accepted_window / (TUNE_WINDOW * n)
            step = np.where(rate < TARGET_ACCEPTANCE[0], 0.8 * step, step)
            step = np.where(rate > TARGET_ACCEPTANCE[1], 1.25 * step, step)
            accepted_window[:] = 0.0
            if logger is not None:
                logger.debug("sampler tuning", {"sweep": sweep + 1, "rate": rate.tolist(), "step": step.tolist()})
        if sweep >= cfg.burn_in and (sweep - cfg.burn_in) % cfg.thin == 0:
            kept.append(x.copy())

    chain_rate = accepted_total / ((cfg.steps - cfg.burn_in) * n)
    if np.any(chain_rate == 0.0):
        raise TuningError("A chain accepted no move after burn-in", chain_acceptance=chain_rate.tolist())
    stacked = np.stack(kept, axis=1)
    configurations = stacked.reshape(n_chains * len(kept), n)
    chain = np.repeat(np.arange(n_chains), len(kept)).astype(np.int64)
    batch = SampleBatch(
        configurations=configurations,
        chain=chain,
        acceptance_rate=float(chain_rate.mean()),
        chain_acceptance=chain_rate,
        step_sizes=step,
        crossings=crossings,
        beta=beta,
        segment_bounds=bounds,
        rng_trace={"seed": cfg.seed, "streams": list(range(n_chains)), "generator": "PCG64"},
    )
    if logger is not None:
        logger.info("sampling complete", batch.diagnostics())
    return batch
