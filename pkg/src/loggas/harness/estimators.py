"""Monte Carlo estimators over a :class:`SampleBatch`, with jackknife errors."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Literal, Mapping, Optional

import numpy as np
import numpy.typing as npt

from src.loggas.errors import ParameterError
from src.loggas.harness.sampler import SampleBatch

FloatArray = npt.NDArray[np.float64]
ComplexArray = npt.NDArray[np.complex128]

JACKKNIFE_BLOCKS = 20


@dataclass(frozen=True)
class Estimate:
    """Mean with its jackknife standard error and the chain diagnostics it came from."""

    value: complex
    stderr: float
    samples: int
    diagnostics: Dict[str, Any] = field(default_factory=dict)
    flags: List[str] = field(default_factory=list)

    @property
    def real(self) -> float:
        return float(np.real(self.value))

    def to_dict(self) -> Dict[str, Any]:
        val: Any = self.real if abs(np.imag(self.value)) == 0.0 else [self.real, float(np.imag(self.value))]
        return {"value": val, "stderr": self.stderr, "samples": self.samples, "diagnostics": self.diagnostics, "flags": self.flags}


def jackknife(values: npt.ArrayLike, statistic: Callable[[Any], complex] = np.mean, blocks: int = JACKKNIFE_BLOCKS) -> tuple[complex, float]:
    """Blocked delete-one jackknife of ``statistic`` over the leading axis."""
    arr = np.asarray(values)
    n = arr.shape[0]
    if n == 0:
        raise ParameterError("jackknife needs at least one sample")
    full = complex(statistic(arr))
    b = min(blocks, n)
    if b < 2:
        return full, float("nan")
    edges = np.linspace(0, n, b + 1).astype(int)
    leave = []
    for i in range(b):
        mask = np.ones(n, dtype=bool)
        mask[edges[i]:edges[i + 1]] = False
        leave.append(complex(statistic(arr[mask])))
    loo = np.array(leave)
    err = float(np.sqrt((b - 1) / b * np.sum(np.abs(loo - loo.mean()) ** 2)))
    return full, err


def integrated_autocorrelation(series: npt.ArrayLike, window: float = 5.0) -> float:
    """Integrated autocorrelation time with Sokal's automatic window."""
    x = np.asarray(series, dtype=float)
    x = x - x.mean()
    n = x.size
    if n < 4 or not np.any(x):
        return 1.0
    spec = np.fft.rfft(x, 2 * n)
    acf = np.fft.irfft(spec * np.conj(spec))[:n]
    acf = acf / acf[0]
    tau = 1.0
    for m in range(1, n):
        tau += 2.0 * acf[m]
        if m >= window * tau:
            break
    return float(max(tau, 1.0))


def _diagnostics(batch: SampleBatch, per_sample: FloatArray) -> Dict[str, Any]:
    taus = [integrated_autocorrelation(per_sample[batch.chain == c]) for c in range(int(batch.chain.max()) + 1)]
    out = batch.diagnostics()
    out["autocorrelation_time"] = float(np.mean(taus))
    return out


def estimate_moments(batch: SampleBatch, powers: List[int]) -> Dict[int, Estimate]:
    """E[N^{-1} sum_i l_i^k] for each k in ``powers``."""
    out: Dict[int, Estimate] = {}
    for k in powers:
        per = np.mean(batch.configurations ** k, axis=1)
        val, err = jackknife(per)
        out[k] = Estimate(val, err, batch.count, _diagnostics(batch, per))
    return out


def linear_statistic(batch: SampleBatch, phi: Callable[[FloatArray], npt.ArrayLike], centre: float = 0.0) -> FloatArray:
    """sum_i phi(l_i) - centre for every kept configuration."""
    return np.asarray(np.sum(np.real(np.asarray(phi(batch.configurations))), axis=1) - centre, dtype=float)


def estimate_linear_stat(
    batch: SampleBatch, phi: Callable[[FloatArray], npt.ArrayLike], centre: float = 0.0
) -> Dict[str, Estimate]:
    """Mean and variance of sum_i phi(l_i) - centre."""
    per = linear_statistic(batch, phi, centre)
    diag = _diagnostics(batch, per)
    mean, mean_err = jackknife(per)
    var, var_err = jackknife(per, lambda a: float(np.var(a, ddof=1)) if a.size > 1 else 0.0)
    return {
        "mean": Estimate(mean, mean_err, batch.count, diag),
        "variance": Estimate(var, var_err, batch.count, diag),
    }


def estimate_filling_histogram(batch: SampleBatch) -> Dict[tuple[int, ...], Estimate]:
    """Empirical law of the segment counts (N_1, ..., N_g), keyed without N_0."""
    fills = batch.fillings()[:, 1:]
    keys = sorted({tuple(int(v) for v in row) for row in fills})
    out: Dict[tuple[int, ...], Estimate] = {}
    for key in keys:
        ind = np.all(fills == np.asarray(key), axis=1).astype(float)
        val, err = jackknife(ind)
        out[key] = Estimate(val, err, batch.count)
    return out


def total_variation(empirical: Mapping[tuple[int, ...], float], model: Mapping[tuple[int, ...], float]) -> float:
    keys = set(empirical) | set(model)
    return 0.5 * float(sum(abs(empirical.get(k, 0.0) - model.get(k, 0.0)) for k in keys))


def ks_distance(samples: npt.ArrayLike, cdf: Callable[[FloatArray], FloatArray]) -> float:
    """Kolmogorov-Smirnov distance between the empirical CDF of ``samples`` and ``cdf``."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    n = x.size
    f = cdf(x)
    upper = np.arange(1, n + 1) / n - f
    lower = f - np.arange(n) / n
    return float(max(np.max(upper), np.max(lower)))


def expected_char_poly(
    batch: SampleBatch,
    x: complex,
    power_signature: Literal["plain", "skew-odd"] = "plain",
    variance_limit: float = 1.0,
) -> Estimate:
    """E[prod_i (x - l_i)], or E[(x + sum_i l_i) prod_i (x - l_i)] for the odd skew variant.

    The estimate is flagged ``high-variance`` when its relative error exceeds
    ``variance_limit`` (typically x too close to the support).
    """
    z = complex(x)
    diffs = z - batch.configurations.astype(np.complex128)
    per = np.prod(diffs, axis=1)
    if power_signature == "skew-odd":
        per = per * (z + np.sum(batch.configurations, axis=1))
    elif power_signature != "plain":
        raise ParameterError("power_signature must be 'plain' or 'skew-odd'", power_signature=power_signature)
    val, err = jackknife(per)
    flags = []
    if not np.isfinite(err) or err > variance_limit * max(abs(val), 1e-300):
        flags.append("high-variance")
    return Estimate(val, err, batch.count, _diagnostics(batch, np.abs(per)), flags)
