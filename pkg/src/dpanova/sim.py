"""Synthetic data and power experiments for the private ANOVA test.

Each replicate generates a dataset, releases it through the mechanism and
computes a p-value, all from one substream keyed by
``(seed, n, epsilon, replicate)``. Power tables are therefore reproducible,
whatever the worker count.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math
import os
from typing import Optional, Sequence

from . import rng as _rng
from .anova import Dataset
from .errors import DegenerateSize, InvalidParameter, UndefinedF
from .mechanism import PrivacyParams, private_anova
from .nulldist import NullConfig, null_distribution, p_value, p_value_for_result

TRUNCATION_MODE = "clamp"

DEFAULT_N_GRID = (10, 30, 100, 300, 1_000, 3_000, 10_000, 30_000,
                  100_000, 300_000, 1_000_000)


@dataclass(frozen=True)
class EffectSpec:
    group_means: tuple
    group_sd: float

    def __post_init__(self):
        means = tuple(float(m) for m in self.group_means)
        if len(means) < 2:
            raise InvalidParameter("an effect needs at least 2 group means")
        if any(not 0.0 <= m <= 1.0 for m in means):
            raise InvalidParameter(f"group means must lie in [0, 1], got {means}")
        if not float(self.group_sd) > 0.0:
            raise InvalidParameter(f"group sd must be positive, got {self.group_sd!r}")
        object.__setattr__(self, "group_means", means)
        object.__setattr__(self, "group_sd", float(self.group_sd))

    @property
    def k(self) -> int:
        return len(self.group_means)


PRESETS = {
    "paper-3group": EffectSpec((0.35, 0.5, 0.65), 0.15),
    "paper-6group": EffectSpec((0.4, 0.45, 0.5, 0.5, 0.5, 0.6), 0.2),
}


@dataclass(frozen=True)
class VarianceMode:
    """``known`` is None for the estimated mode, else the true sigma^2."""

    known: Optional[float] = None

    @classmethod
    def parse(cls, text: str) -> "VarianceMode":
        if text == "estimated":
            return cls()
        if text.startswith("known:"):
            try:
                value = float(text[len("known:"):])
            except ValueError:
                value = math.nan
            if not 0.0 < value < math.inf:
                raise InvalidParameter(f"known variance must be positive, got {text!r}")
            return cls(value)
        raise InvalidParameter(f"variance mode must be 'estimated' or 'known:FLOAT', got {text!r}")

    def __str__(self):
        return "estimated" if self.known is None else f"known:{self.known!r}"


@dataclass(frozen=True)
class PowerConfig:
    effect: EffectSpec
    n_grid: tuple
    epsilons: tuple
    reps: int = 1000
    alpha: float = 0.05
    null_sims: int = 100_000
    variance_mode: VarianceMode = field(default_factory=VarianceMode)
    seed: int = 0

    def __post_init__(self):
        n_grid = tuple(int(n) for n in self.n_grid)
        epsilons = tuple(PrivacyParams(e).epsilon for e in self.epsilons)
        if not n_grid:
            raise InvalidParameter("n grid is empty")
        if not epsilons:
            raise InvalidParameter("epsilon list is empty")
        bad = [n for n in n_grid if n <= self.effect.k]
        if bad:
            raise DegenerateSize(f"every n must exceed k={self.effect.k}, got {bad}")
        if int(self.reps) < 1:
            raise InvalidParameter(f"reps must be at least 1, got {self.reps}")
        if not 0.0 < self.alpha < 1.0:
            raise InvalidParameter(f"alpha must lie in (0, 1), got {self.alpha}")
        if int(self.null_sims) < 1:
            raise InvalidParameter(f"null sims must be at least 1, got {self.null_sims}")
        object.__setattr__(self, "n_grid", n_grid)
        object.__setattr__(self, "epsilons", epsilons)


@dataclass(frozen=True)
class PowerCurvePoint:
    n: int
    epsilon: float
    power: float
    reps: int


def default_n_grid(k: int, limit: Optional[int] = None) -> tuple:
    """Log-spaced sizes from 10 to 1e6, each rounded to a multiple of k.

    Every size is at least 2k, duplicates are dropped, and ``limit`` caps
    the largest size.
    """
    out = []
    for n in DEFAULT_N_GRID:
        if limit is not None and n > limit:
            break
        m = k * max(2, round(n / k))
        if m not in out:
            out.append(m)
    return tuple(out)


def sample_truncated_normal(stream, mean: float, sd: float) -> float:
    """Normal(mean, sd) draw projected onto [0, 1]."""
    if not sd > 0.0:
        raise InvalidParameter(f"sd must be positive, got {sd!r}")
    return stream.truncated_normal(mean, sd)


def group_sizes(n: int, k: int) -> list[int]:
    """``n // k`` rows per group; the first ``n % k`` groups get one extra."""
    base, extra = divmod(n, k)
    return [base + (1 if i < extra else 0) for i in range(k)]


def generate_dataset(effect: EffectSpec, n: int, stream) -> Dataset:
    if n <= effect.k:
        raise DegenerateSize(f"n must exceed k (n={n}, k={effect.k})")
    groups = []
    for i, (mean, size) in enumerate(zip(effect.group_means, group_sizes(n, effect.k))):
        values = stream.truncated_normal_array(mean, effect.group_sd, size)
        groups.append((f"g{i + 1}", values))
    return Dataset.from_groups(groups)


def run_replicate(
    effect: EffectSpec,
    n: int,
    epsilon: float,
    variance_mode: VarianceMode,
    null_sims: int,
    stream,
) -> float:
    """Generate data, release it privately, and return the p-value.

    The null-distribution seed comes from ``stream`` after the data and the
    noise have been drawn.
    """
    d = generate_dataset(effect, n, stream)
    try:
        r = private_anova(d, PrivacyParams(epsilon), stream)
    except UndefinedF:
        # noiseless and constant within and across groups: nothing to detect
        return 1.0
    null_seed = stream.next_u64()
    return p_value_for_result(
        r, null_sims, null_seed, known_sigma2=variance_mode.known
    ).p


def _point_key(seed: int, n: int, epsilon: float) -> int:
    return _rng.stream_key(seed, int(n), float(epsilon))


def power_point(
    cfg: PowerConfig, n: int, epsilon: float, workers: Optional[int] = 1
) -> PowerCurvePoint:
    """Share of ``cfg.reps`` replicates with p < alpha at one (n, epsilon)."""
    epsilon = float(epsilon)
    key = _point_key(cfg.seed, n, epsilon)

    def replicate(i):
        return run_replicate(cfg.effect, n, epsilon, cfg.variance_mode,
                             cfg.null_sims, _rng.substream(key, i))

    reps = int(cfg.reps)
    workers = min(8, os.cpu_count() or 1) if workers is None else max(1, int(workers))
    if workers == 1:
        ps = [replicate(i) for i in range(reps)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            ps = list(pool.map(replicate, range(reps)))
    hits = sum(1 for p in ps if p < cfg.alpha)
    return PowerCurvePoint(int(n), epsilon, hits / reps, reps)


def power_curve(cfg: PowerConfig, workers: Optional[int] = 1, progress=None) -> list:
    """One :class:`PowerCurvePoint` per (n, epsilon), n varying slowest."""
    points = []
    for n in cfg.n_grid:
        for eps in cfg.epsilons:
            pt = power_point(cfg, n, eps, workers=workers)
            if progress is not None:
                progress(pt)
            points.append(pt)
    return points


def crossing_n(points: Sequence[PowerCurvePoint], level: float) -> float:
    """Smallest n at which power reaches ``level``, interpolated in log n.

    Returns inf if the curve never gets there.
    """
    pts = sorted(points, key=lambda p: p.n)
    prev = None
    for pt in pts:
        if pt.power >= level:
            if prev is None or prev.power >= level:
                return float(pt.n)
            frac = (level - prev.power) / (pt.power - prev.power)
            return math.exp(math.log(prev.n) + frac * (math.log(pt.n) - math.log(prev.n)))
        prev = pt
    return math.inf


def export_null_comparison(
    n: int,
    k: int,
    sigma2: float,
    epsilons: Sequence[float],
    sims: int,
    seed: int,
    workers: Optional[int] = 1,
) -> list:
    """``[(epsilon, draws), ...]`` of null F-hat samples, one entry per epsilon.

    Each epsilon gets its own seed derived from ``(seed, epsilon)``.
    """
    table = []
    for eps in epsilons:
        c = NullConfig(n, k, float(eps), sigma2, sims)
        sub_seed = _rng.stream_key(seed, float(eps))
        table.append((c.epsilon, null_distribution(c, sub_seed, workers=workers)))
    return table


def tail_fraction(samples, threshold: float) -> float:
    """Share of ``samples`` at or above ``threshold``."""
    return p_value(threshold, samples)

