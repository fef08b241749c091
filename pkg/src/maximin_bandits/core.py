"""Shared domain types for finite-class bandit experiments.

A problem instance is a finite matrix of mean rewards (one row per candidate
mean function, one column per arm) together with a conditional reward
distribution whose mean at every arm equals the chosen row.  Everything
downstream (games, learners, experiment harness) builds on the types here.

All randomness flows through explicit ``numpy.random.Generator`` streams or
integer seeds derived via :func:`trial_seed`, so a run is a pure function of
(config, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "CapacityError",
    "PrecisionError",
    "FunctionClass",
    "NoiseSpec",
    "Model",
    "ArmDistribution",
    "Transcript",
    "gap_matrix",
    "argmax_arm",
    "sample_reward",
    "sample_rewards",
    "two_point_support",
    "trial_seed",
    "HEAVY_TAIL_OUTLIER_PROB",
    "NOISE_KINDS",
]

_MASK64 = (1 << 64) - 1

#: Total probability that a heavy-tail three-point reward lands on an outlier
#: (split evenly between the two outliers).  The outlier offset is then fixed
#: by the requested variance.
HEAVY_TAIL_OUTLIER_PROB = 0.02

NOISE_KINDS = ("deterministic", "bernoulli", "gaussian", "two-point", "heavy-tail")

_BOUNDED_KINDS = ("deterministic", "bernoulli", "two-point")


class CapacityError(ValueError):
    """A requested construction exceeds the configured size limits."""


class PrecisionError(ValueError):
    """A requested tolerance is finer than the numeric scheme can resolve."""


def _split_mix64(state: int) -> int:
    # SplitMix64 finalizer: bijective 64-bit mix, stable across platforms.
    z = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def trial_seed(master_seed: int, index: int) -> int:
    """Derive the 64-bit seed of one trial from a master seed.

    Pure integer arithmetic, independent of numpy versions, so persisted
    experiment outputs are reproducible byte for byte.
    """
    if index < 0:
        raise ValueError("trial index must be nonnegative")
    return _split_mix64((_split_mix64(master_seed & _MASK64) + index) & _MASK64)


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class FunctionClass:
    """A finite class of candidate mean-reward functions over finitely many arms.

    Parameters
    ----------
    means:
        Matrix of shape (functions, arms) with entries in [0, 1]; row ``f``
        lists the mean reward of every arm when ``f`` is the truth.
    labels:
        Optional JSON-compatible metadata (family name, per-arm or
        per-function names, construction parameters).
    """

    means: np.ndarray
    labels: dict | None = None

    def __post_init__(self):
        means = np.asarray(self.means, dtype=float)
        if means.ndim != 2 or means.shape[0] < 1 or means.shape[1] < 1:
            raise ValueError("means must be a matrix with >= 1 function and >= 1 arm")
        if not np.all(np.isfinite(means)):
            raise ValueError("means must be finite")
        if means.min() < 0.0 or means.max() > 1.0:
            raise ValueError("mean rewards must lie in [0, 1]")
        object.__setattr__(self, "means", _frozen_array(means, float))

    @property
    def n_functions(self) -> int:
        return self.means.shape[0]

    @property
    def n_arms(self) -> int:
        return self.means.shape[1]

    @property
    def family(self) -> str:
        if self.labels and "family" in self.labels:
            return str(self.labels["family"])
        return "inline"

    def row(self, function: int) -> np.ndarray:
        if not 0 <= function < self.n_functions:
            raise IndexError(f"function index {function} out of range")
        return self.means[function]

    def to_json(self) -> dict:
        doc = {
            "arms": self.n_arms,
            "functions": self.n_functions,
            "means": [[float(v) for v in row] for row in self.means],
        }
        if self.labels is not None:
            doc["labels"] = self.labels
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "FunctionClass":
        fc = cls(np.asarray(doc["means"], dtype=float), labels=doc.get("labels"))
        if "arms" in doc and int(doc["arms"]) != fc.n_arms:
            raise ValueError("declared arm count disagrees with the means matrix")
        if "functions" in doc and int(doc["functions"]) != fc.n_functions:
            raise ValueError("declared function count disagrees with the means matrix")
        return fc


@dataclass(frozen=True)
class NoiseSpec:
    """Conditional reward distribution; the mean at arm a is always f(a).

    Kinds
    -----
    deterministic:
        Reward equals the mean exactly.
    bernoulli:
        Reward in {0, 1} with success probability equal to the mean.
    gaussian:
        Mean plus centered Gaussian noise with standard deviation ``sigma``;
        unbounded support.
    two-point:
        Support {mean - c, mean + c} clipped into [0, 1]: when one side would
        leave [0, 1] the nearer boundary becomes a support point and the
        probability pair is re-solved to preserve the mean.  Requires
        c in [0, 1/2].
    heavy-tail:
        Three-point distribution {mean - s, mean, mean + s} with outlier
        probability ``HEAVY_TAIL_OUTLIER_PROB`` split across the two extremes
        and s chosen so the variance is exactly sigma**2.  Rare but very large
        excursions; support typically leaves [0, 1].
    """

    kind: str
    sigma: float | None = None
    c: float | None = None

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.kind in ("gaussian", "heavy-tail"):
            if self.sigma is None or not (self.sigma > 0) or not math.isfinite(self.sigma):
                raise ValueError(f"{self.kind} noise requires sigma > 0")
        elif self.sigma is not None:
            raise ValueError(f"{self.kind} noise takes no sigma")
        if self.kind == "two-point":
            if self.c is None or not (0.0 <= self.c <= 0.5):
                raise ValueError("two-point noise requires c in [0, 1/2]")
        elif self.c is not None:
            raise ValueError(f"{self.kind} noise takes no c")

    @classmethod
    def deterministic(cls) -> "NoiseSpec":
        return cls("deterministic")

    @classmethod
    def bernoulli(cls) -> "NoiseSpec":
        return cls("bernoulli")

    @classmethod
    def gaussian(cls, sigma: float) -> "NoiseSpec":
        return cls("gaussian", sigma=float(sigma))

    @classmethod
    def two_point(cls, c: float) -> "NoiseSpec":
        return cls("two-point", c=float(c))

    @classmethod
    def heavy_tail(cls, sigma: float) -> "NoiseSpec":
        return cls("heavy-tail", sigma=float(sigma))

    @property
    def bounded(self) -> bool:
        """True when rewards always land in [0, 1]."""
        return self.kind in _BOUNDED_KINDS

    def variance_bound(self, mean: float) -> float:
        """Exact reward variance at a given conditional mean."""
        if self.kind == "deterministic":
            return 0.0
        if self.kind == "bernoulli":
            return mean * (1.0 - mean)
        if self.kind == "two-point":
            lo, hi, p_hi = two_point_support(mean, self.c)
            return p_hi * (hi - mean) ** 2 + (1.0 - p_hi) * (lo - mean) ** 2
        return float(self.sigma) ** 2

    def to_json(self) -> dict:
        doc: dict = {"kind": self.kind}
        if self.sigma is not None:
            doc["sigma"] = self.sigma
        if self.c is not None:
            doc["c"] = self.c
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "NoiseSpec":
        return cls(doc["kind"], sigma=doc.get("sigma"), c=doc.get("c"))


def two_point_support(mean: float, c: float) -> tuple[float, float, float]:
    """Support points and upper-point probability of the two-point reward law.

    Returns (lo, hi, p_hi) with p_hi * hi + (1 - p_hi) * lo == mean and both
    support points inside [0, 1].  With c <= 1/2 at most one side of
    mean +- c can leave [0, 1], so a single boundary substitution suffices.
    """
    if not 0.0 <= mean <= 1.0:
        raise ValueError("mean must lie in [0, 1]")
    if not 0.0 <= c <= 0.5:
        raise ValueError("c must lie in [0, 1/2]")
    lo, hi = mean - c, mean + c
    if lo < 0.0:
        lo = 0.0
    elif hi > 1.0:
        hi = 1.0
    if hi <= lo:
        return mean, mean, 1.0
    return lo, hi, (mean - lo) / (hi - lo)


@dataclass(frozen=True, eq=False)
class Model:
    """A function class with a designated true row and a reward law."""

    function_class: FunctionClass
    true_function: int
    noise: NoiseSpec

    def __post_init__(self):
        if not 0 <= self.true_function < self.function_class.n_functions:
            raise IndexError(f"true function {self.true_function} out of range")

    @property
    def true_means(self) -> np.ndarray:
        return self.function_class.means[self.true_function]

    def mean(self, arm: int) -> float:
        if not 0 <= arm < self.function_class.n_arms:
            raise IndexError(f"arm {arm} out of range")
        return float(self.true_means[arm])

    def optimal_arms(self, alpha: float) -> np.ndarray:
        """Arms whose mean is within alpha of the best mean (alpha >= 0)."""
        if alpha < 0:
            raise ValueError("alpha must be >= 0")
        row = self.true_means
        return np.flatnonzero(row.max() - row <= alpha)

    @property
    def best_arm(self) -> int:
        return int(np.argmax(self.true_means))


def sample_rewards(model: Model, arm: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``count`` i.i.d. rewards for one arm under the model's noise."""
    if not 0 <= arm < model.function_class.n_arms:
        raise IndexError(f"arm {arm} out of range")
    if count < 1:
        raise ValueError("count must be >= 1")
    mu = float(model.true_means[arm])
    kind = model.noise.kind
    if kind == "deterministic":
        return np.full(count, mu)
    if kind == "bernoulli":
        return (rng.random(count) < mu).astype(float)
    if kind == "gaussian":
        return mu + model.noise.sigma * rng.standard_normal(count)
    if kind == "two-point":
        lo, hi, p_hi = two_point_support(mu, model.noise.c)
        return np.where(rng.random(count) < p_hi, hi, lo)
    # heavy-tail three-point: variance sigma**2 packed into rare outliers
    s = model.noise.sigma / math.sqrt(HEAVY_TAIL_OUTLIER_PROB)
    half = HEAVY_TAIL_OUTLIER_PROB / 2.0
    u = rng.random(count)
    out = np.full(count, mu)
    out[u < half] = mu - s
    out[u >= 1.0 - half] = mu + s
    return out


def sample_reward(model: Model, arm: int, rng: np.random.Generator) -> float:
    """Draw a single reward for one arm."""
    return float(sample_rewards(model, arm, 1, rng)[0])


@dataclass(frozen=True, eq=False)
class ArmDistribution:
    """A probability vector over arms (entries >= 0, sum within 1e-9 of 1)."""

    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 1 or probs.size < 1:
            raise ValueError("probs must be a nonempty vector")
        if not np.all(np.isfinite(probs)) or probs.min() < 0.0:
            raise ValueError("probabilities must be finite and >= 0")
        if abs(probs.sum() - 1.0) > 1e-9:
            raise ValueError("probabilities must sum to 1 within 1e-9")
        object.__setattr__(self, "probs", _frozen_array(probs, float))

    @property
    def n_arms(self) -> int:
        return self.probs.size

    @classmethod
    def uniform(cls, n_arms: int) -> "ArmDistribution":
        return cls(np.full(n_arms, 1.0 / n_arms))

    @classmethod
    def point_mass(cls, arm: int, n_arms: int) -> "ArmDistribution":
        probs = np.zeros(n_arms)
        probs[arm] = 1.0
        return cls(probs)

    def sample(self, rng: np.random.Generator, size: int | None = None):
        """Inverse-CDF sampling; deterministic given the generator state."""
        cdf = np.cumsum(self.probs)
        u = rng.random(size if size is not None else 1)
        idx = np.minimum(np.searchsorted(cdf, u, side="right"), self.n_arms - 1)
        return int(idx[0]) if size is None else idx.astype(np.int64)

    def expectation(self, values) -> float:
        return float(self.probs @ np.asarray(values, dtype=float))


@dataclass(eq=False)
class Transcript:
    """The full interaction record of one learner run.

    ``arms[i]`` is the arm queried in round i+1 (rounds count from 1) and
    ``rewards[i]`` the observed reward.  ``meta`` carries learner-specific
    diagnostics (and an ``error`` tag when a run ends abnormally).
    """

    learner_name: str
    seed: int
    arms: np.ndarray
    rewards: np.ndarray
    output_arm: int
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        arms = _frozen_array(np.asarray(self.arms, dtype=np.int64), np.int64)
        rewards = _frozen_array(np.asarray(self.rewards, dtype=float), float)
        if arms.ndim != 1 or rewards.ndim != 1 or arms.size != rewards.size:
            raise ValueError("arms and rewards must be 1-D and equal length")
        if self.output_arm < 0:
            raise ValueError("output arm must be a valid index")
        if arms.size and arms.min() < 0:
            raise ValueError("queried arms must be valid indices")
        object.__setattr__(self, "arms", arms)
        object.__setattr__(self, "rewards", rewards)

    @property
    def total_queries(self) -> int:
        return int(self.arms.size)

    @property
    def rounds(self) -> np.ndarray:
        return np.arange(1, self.total_queries + 1, dtype=np.int64)

    def records(self) -> list[tuple[int, int, float]]:
        """Materialize (round, arm, reward) triples; rounds start at 1."""
        return list(zip(self.rounds.tolist(), self.arms.tolist(), self.rewards.tolist()))


def gap_matrix(fclass: FunctionClass, alpha: float) -> np.ndarray:
    """Binary matrix marking which arms are alpha-optimal under each function.

    Entry [f, a] is 1 iff max_a' means[f, a'] - means[f, a] <= alpha
    (non-strict).  Every row contains at least one 1 because the row maximum
    itself has gap zero.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    means = fclass.means
    gaps = means.max(axis=1, keepdims=True) - means
    return (gaps <= alpha).astype(np.int8)


def argmax_arm(fclass: FunctionClass, function: int) -> int:
    """Least-index arm maximizing the given function."""
    return int(np.argmax(fclass.row(function)))
