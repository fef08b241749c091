"""Mean estimators and the sample-count formulas the learners rely on.

Two concentration regimes drive the query budgets: a Hoeffding/Chernoff count
for rewards bounded in [0, 1], and a median-of-means count for rewards that
are merely variance-bounded.  Natural logarithms throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MoMConfig",
    "chernoff_sample_count",
    "median_of_means_sample_count",
    "mom_groups",
    "empirical_mean",
    "median_of_means",
]

DEFAULT_CM = 4.0


@dataclass(frozen=True)
class MoMConfig:
    """Median-of-means configuration: group count and deviation constant."""

    groups: int
    c_m: float = DEFAULT_CM

    def __post_init__(self):
        if self.groups < 1:
            raise ValueError("group count must be >= 1")
        if not self.c_m > 0:
            raise ValueError("c_m must be positive")


def chernoff_sample_count(alpha: float, delta: float, m: int) -> int:
    """Per-arm queries so that m simultaneous [0,1]-mean estimates each land
    within alpha/4 with probability 1 - delta/2: ceil((8/alpha^2) ln(4m/delta)).
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if m < 1:
        raise ValueError("m must be >= 1")
    return math.ceil(8.0 / (alpha * alpha) * math.log(4.0 * m / delta))


def median_of_means_sample_count(
    alpha: float, delta: float, m: int, sigma: float, c_m: float = DEFAULT_CM
) -> int:
    """Per-arm queries for variance-bounded rewards:
    ceil(16 c_m sigma^2 ln(2m/delta) / alpha^2).
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if m < 1:
        raise ValueError("m must be >= 1")
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    if not c_m > 0:
        raise ValueError("c_m must be positive")
    return math.ceil(16.0 * c_m * sigma * sigma * math.log(2.0 * m / delta) / (alpha * alpha))


def mom_groups(delta: float) -> int:
    """Group count ceil(ln(2/delta)) used by the median-of-means learner."""
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    return max(1, math.ceil(math.log(2.0 / delta)))


def empirical_mean(samples) -> float:
    """Arithmetic mean; rejects empty input."""
    arr = np.asarray(samples, dtype=float)
    if arr.size == 0:
        raise ValueError("cannot average an empty sample")
    return float(arr.mean())


def median_of_means(samples, config: MoMConfig) -> float:
    """Median of K consecutive group means.

    The input is split into ``config.groups`` consecutive groups of
    floor(n / K) samples; the remainder at the tail is dropped.  For even K
    the lower median is returned.  The estimate always lies within
    [min(samples), max(samples)].
    """
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 1:
        raise ValueError("samples must be a 1-D sequence")
    k = config.groups
    if arr.size < k:
        raise ValueError(f"need at least {k} samples for {k} groups")
    group_size = arr.size // k
    group_means = arr[: group_size * k].reshape(k, group_size).mean(axis=1)
    return float(np.sort(group_means)[(k - 1) // 2])
