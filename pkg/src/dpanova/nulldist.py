"""Monte-Carlo null distribution of the noisy F ratio, and p-values.

Under the null, SSA ~ sigma2*chi2(k-1) and SSE ~ sigma2*chi2(n-k). The
released sums also carry the mechanism's Laplace noise, and that noise does
not cancel in the ratio. So the null is simulated with the same noise
scales, and the observed F-hat is ranked against it. Only released fields
are read, which makes the p-value free post-processing.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import math
import os
from typing import Optional

import numpy as np

from . import rng as _rng
from .errors import EmptyNullSample, InvalidParameter
from .mechanism import PrivateAnovaResult, noise_scales

DEFAULT_SIMS = 100_000
SIGMA2_FLOOR = 1e-6

# Indices per task when draws are split across threads. Fixed so that the
# split never depends on the worker count.
_CHUNK = 8192


@dataclass(frozen=True)
class NullConfig:
    n: int
    k: int
    epsilon: float
    sigma2: float
    sims: int = DEFAULT_SIMS

    def __post_init__(self):
        if not (self.k >= 2 and self.n > self.k):
            raise InvalidParameter(f"need n > k >= 2 (n={self.n}, k={self.k})")
        if not self.sigma2 > 0.0 or math.isinf(self.sigma2):
            raise InvalidParameter(f"sigma2 must be positive and finite, got {self.sigma2!r}")
        if not float(self.epsilon) > 0.0:
            raise InvalidParameter(f"epsilon must be positive, got {self.epsilon!r}")
        if int(self.sims) < 1:
            raise InvalidParameter(f"sims must be at least 1, got {self.sims!r}")
        object.__setattr__(self, "epsilon", float(self.epsilon))
        object.__setattr__(self, "sigma2", float(self.sigma2))

    @property
    def scales(self) -> tuple[float, float]:
        return noise_scales(self.n, self.epsilon)


@dataclass(frozen=True)
class PValueResult:
    p: float
    sigma2_used: float
    sims: int
    f_observed: float


def sample_chi_squared(stream, df: int) -> float:
    """One chi-squared(df) variate, drawn as 2 * Gamma(df/2)."""
    if df < 1:
        raise InvalidParameter(f"df must be at least 1, got {df}")
    return stream.chi_squared(float(df))


def simulate_null_f_hat(c: NullConfig, stream) -> float:
    """One null F-hat draw.

    Draw order is chi2(k-1), Lap(b_ssa), chi2(n-k), Lap(b_sse). If the
    simulated SSE is exactly zero, the whole pair is drawn again.
    """
    b_ssa, b_sse = c.scales
    return _rng.null_f_draw(stream, c.n, c.k, c.sigma2, b_ssa, b_sse)


def _resolve_workers(workers):
    if workers is None:
        return min(8, os.cpu_count() or 1)
    return max(1, int(workers))


def null_distribution(c: NullConfig, seed: int, workers: Optional[int] = 1) -> np.ndarray:
    """``c.sims`` null F-hat draws.

    Draw ``i`` comes from its own substream keyed by ``(seed, i)``. The
    output is therefore the same for any ``workers`` value. ``None`` means
    one worker per CPU, up to 8.
    """
    key = _rng.stream_key(seed)
    b_ssa, b_sse = c.scales
    sims = int(c.sims)
    workers = _resolve_workers(workers)

    def run(bounds):
        start, stop = bounds
        return _rng.null_f_draws(key, c.n, c.k, c.sigma2, b_ssa, b_sse, start, stop)

    if workers == 1 or sims <= _CHUNK:
        return run((0, sims))
    chunks = [(s, min(s + _CHUNK, sims)) for s in range(0, sims, _CHUNK)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return np.concatenate(list(pool.map(run, chunks)))


def p_value(f_observed: float, null_samples, smoothed: bool = False) -> float:
    """Share of null draws at or above ``f_observed``.

    With ``smoothed=True`` returns ``(count + 1) / (sims + 1)``.
    """
    samples = np.asarray(null_samples, dtype=np.float64)
    if samples.size == 0:
        raise EmptyNullSample("null sample list is empty")
    if math.isnan(f_observed):
        raise InvalidParameter("observed F is nan")
    count = int(np.count_nonzero(samples >= f_observed))
    if smoothed:
        return (count + 1) / (samples.size + 1)
    return count / samples.size


def estimate_sigma2(r: PrivateAnovaResult) -> float:
    """SSE-hat/(n-k), floored at ``SIGMA2_FLOOR`` because SSE-hat can be <= 0."""
    return max(r.sse_hat / (r.n - r.k), SIGMA2_FLOOR)


def p_value_for_result(
    r: PrivateAnovaResult,
    sims: int = DEFAULT_SIMS,
    seed: int = 0,
    *,
    known_sigma2: Optional[float] = None,
    workers: Optional[int] = 1,
    smoothed: bool = False,
) -> PValueResult:
    """p-value for a released result, using only its public fields.

    The null variance is estimated from SSE-hat unless ``known_sigma2`` is
    supplied. That option is an oracle for experiments and is unavailable
    in real use.
    """
    if int(sims) < 1:
        raise EmptyNullSample(f"sims must be at least 1, got {sims!r}")
    sigma2 = estimate_sigma2(r) if known_sigma2 is None else float(known_sigma2)
    c = NullConfig(r.n, r.k, r.epsilon, sigma2, int(sims))
    samples = null_distribution(c, seed, workers=workers)
    return PValueResult(p_value(r.f_hat, samples, smoothed), sigma2, int(sims), r.f_hat)
