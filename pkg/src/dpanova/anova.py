"""Exact one-way ANOVA on bounded data.

Sums go through :func:`math.fsum`, which returns the correctly rounded sum
of its inputs. The results therefore do not depend on row or group order,
and they stay accurate at large n.

Input values must already be normalised to [0, 1]. Picking the bounds from
the data itself would leak information, so that is left to the caller.
"""
from dataclasses import dataclass
import math
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import (
    DegenerateSize,
    DuplicateLabel,
    EmptyGroup,
    TooFewGroups,
    UndefinedF,
    ValueOutOfRange,
)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Labelled groups of values in [0, 1].

    Use :func:`validate_dataset` or :meth:`from_groups` to build one; the
    value arrays are stored read-only.
    """

    labels: tuple
    values: tuple  # one read-only float64 array per group

    @classmethod
    def from_groups(cls, groups: Iterable[tuple[str, Sequence[float]]]) -> "Dataset":
        labels = []
        arrays = []
        for label, vals in groups:
            label = str(label)
            if label in labels:
                raise DuplicateLabel(f"duplicate group label {label!r}")
            arr = np.array(vals, dtype=np.float64).reshape(-1)
            if arr.size == 0:
                raise EmptyGroup(f"group {label!r} has no values")
            bad = ~((arr >= 0.0) & (arr <= 1.0))
            if bad.any():
                raise ValueOutOfRange(
                    f"group {label!r} has value {arr[bad][0]!r} outside [0, 1]"
                )
            arr.flags.writeable = False
            labels.append(label)
            arrays.append(arr)
        if len(labels) < 2:
            raise TooFewGroups(f"need at least 2 groups, got {len(labels)}")
        n = sum(a.size for a in arrays)
        if n <= len(labels):
            raise DegenerateSize(
                f"need more rows than groups (n={n}, k={len(labels)})"
            )
        return cls(tuple(labels), tuple(arrays))

    @property
    def k(self) -> int:
        return len(self.labels)

    @property
    def sizes(self) -> list[int]:
        return [int(a.size) for a in self.values]

    @property
    def n(self) -> int:
        return sum(self.sizes)

    @property
    def groups(self) -> list[tuple[str, np.ndarray]]:
        return list(zip(self.labels, self.values))

    def rows(self):
        """Yield ``(label, value)`` pairs in group order."""
        for label, arr in zip(self.labels, self.values):
            for v in arr:
                yield label, float(v)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return self.labels == other.labels and all(
            np.array_equal(a, b) for a, b in zip(self.values, other.values)
        )

    def __repr__(self):
        return f"Dataset(k={self.k}, n={self.n}, sizes={self.sizes})"


def validate_dataset(raw: Iterable[tuple[str, float]]) -> Dataset:
    """Build a :class:`Dataset` from ``(label, value)`` rows.

    Groups keep the order in which their labels first appear. Values are
    checked against [0, 1] and never clamped.
    """
    grouped: dict[str, list[float]] = {}
    for label, value in raw:
        value = float(value)
        if not 0.0 <= value <= 1.0:
            raise ValueOutOfRange(f"value {value!r} for group {label!r} is outside [0, 1]")
        grouped.setdefault(str(label), []).append(value)
    if not grouped:
        raise TooFewGroups("no rows")
    return Dataset.from_groups(grouped.items())


@dataclass(frozen=True)
class GroupStats:
    group_means: tuple
    grand_mean: float
    group_sizes: tuple


@dataclass(frozen=True)
class ExactAnova:
    """Exact sums of squares. Not private: never release these directly."""

    ssa: float
    sse: float
    f: Optional[float]  # None when sse == 0
    df_between: int
    df_within: int


def group_stats(d: Dataset) -> GroupStats:
    means = tuple(math.fsum(a) / a.size for a in d.values)
    grand = math.fsum(np.concatenate(d.values)) / d.n
    return GroupStats(means, grand, tuple(d.sizes))


def compute_ssa(d: Dataset, s: GroupStats) -> float:
    return math.fsum(
        n_i * (m - s.grand_mean) ** 2 for n_i, m in zip(s.group_sizes, s.group_means)
    )


def compute_sse(d: Dataset, s: GroupStats) -> float:
    squares = [(a - m) ** 2 for a, m in zip(d.values, s.group_means)]
    return math.fsum(np.concatenate(squares))


def compute_f(ssa: float, sse: float, n: int, k: int) -> float:
    """F ratio ``(ssa/(k-1)) / (sse/(n-k))``.

    Raises:
        UndefinedF: if ``sse`` is exactly zero.
        DegenerateSize: unless ``n > k >= 2``.
    """
    if k < 2 or n <= k:
        raise DegenerateSize(f"F needs n > k >= 2 (n={n}, k={k})")
    if sse == 0.0:
        raise UndefinedF("SSE is zero; F is undefined")
    return (ssa / (k - 1)) / (sse / (n - k))


def exact_anova(d: Dataset) -> ExactAnova:
    s = group_stats(d)
    ssa = compute_ssa(d, s)
    sse = compute_sse(d, s)
    try:
        f = compute_f(ssa, sse, d.n, d.k)
    except UndefinedF:
        f = None
    return ExactAnova(ssa, sse, f, d.k - 1, d.n - d.k)
