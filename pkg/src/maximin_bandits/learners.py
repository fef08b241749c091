"""Pure-exploration learners over finite function classes.

Four strategies, all emitting full interaction transcripts:

* :func:`run_empirical_mean_learner`: samples arms i.i.d. from the maximin
  coverage witness and keeps the best empirical mean; for rewards bounded in
  [0, 1].
* :func:`run_median_of_means_learner`: same sampling phase with
  median-of-means estimates; for variance-bounded (possibly unbounded)
  rewards.
* :func:`run_tree_descent`: adaptive root-to-leaf descent specialized to the
  binary-tree class; exponentially fewer queries than any fixed schedule.
* :func:`run_e2d`: estimation-to-decisions: an online regression oracle
  (exponential weights, squared loss) drives a per-round search for a
  low-coefficient sampling pair, followed by a boosted exploitation phase and
  a final coverage-sampling phase.

Plus :func:`run_non_adaptive_uniform`, the fixed-schedule baseline the tree
class defeats.

Every learner is a pure function of its arguments and an integer seed; the
query schedule of the coverage-sampling learners depends on the class and
parameters only, never on observed rewards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import games
from .core import (
    ArmDistribution,
    FunctionClass,
    Model,
    Transcript,
    gap_matrix,
    sample_rewards,
)
from .dec import dec_at, version_set
from .environments import TreeMeta
from .estimators import (
    DEFAULT_CM,
    MoMConfig,
    chernoff_sample_count,
    median_of_means,
    median_of_means_sample_count,
    mom_groups,
)

__all__ = [
    "LearnerParams",
    "UnlearnableInstanceError",
    "run_empirical_mean_learner",
    "run_median_of_means_learner",
    "run_tree_descent",
    "run_non_adaptive_uniform",
    "run_e2d",
    "OnlineRegressionOracle",
    "online_regression_weights",
    "est_bound",
    "LEARNER_NAMES",
]

LEARNER_NAMES = (
    "empirical-mean",
    "median-of-means",
    "tree-descent",
    "non-adaptive-uniform",
    "e2d",
)

#: Descent threshold for the tree class: branch markers sit at 1/3 and 2/3,
#: so testing the node's empirical mean against 1/2 leaves a 1/6 margin.
TREE_THRESHOLD = 0.5
TREE_NODE_FACTOR = 18.0


class UnlearnableInstanceError(RuntimeError):
    """The coverage value is zero, so no sampling mixture can succeed."""


@dataclass(frozen=True)
class LearnerParams:
    """Accuracy/confidence targets plus learner-specific knobs.

    ``sigma`` upper-bounds the reward standard deviation (median-of-means
    learner), ``horizon`` is the exploration-plus-exploitation budget of the
    e2d learner, ``budget`` the position count of the non-adaptive baseline.
    """

    alpha: float
    delta: float
    sigma: float | None = None
    c_m: float | None = None
    horizon: int | None = None
    budget: int | None = None
    reps_per_arm: int = 1

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if self.sigma is not None and not self.sigma > 0:
            raise ValueError("sigma must be positive when given")
        if self.c_m is not None and not self.c_m > 0:
            raise ValueError("c_m must be positive when given")
        if self.horizon is not None and self.horizon < 1:
            raise ValueError("horizon must be >= 1 when given")
        if self.budget is not None and self.budget < 0:
            raise ValueError("budget must be >= 0 when given")
        if self.reps_per_arm < 1:
            raise ValueError("reps_per_arm must be >= 1")

    def to_json(self) -> dict:
        doc = {"alpha": self.alpha, "delta": self.delta}
        for key in ("sigma", "c_m", "horizon", "budget"):
            val = getattr(self, key)
            if val is not None:
                doc[key] = val
        if self.reps_per_arm != 1:
            doc["reps_per_arm"] = self.reps_per_arm
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "LearnerParams":
        doc = dict(doc)
        horizon = doc.get("horizon", doc.get("T"))
        c_m = doc.get("c_m", doc.get("cM"))
        return cls(
            alpha=float(doc["alpha"]),
            delta=float(doc["delta"]),
            sigma=doc.get("sigma"),
            c_m=c_m,
            horizon=None if horizon is None else int(horizon),
            budget=doc.get("budget"),
            reps_per_arm=int(doc.get("reps_per_arm", 1)),
        )


def _check_model(fclass: FunctionClass, model: Model) -> None:
    if model.function_class is fclass:
        return
    if not np.array_equal(model.function_class.means, fclass.means):
        raise ValueError("model was built from a different function class")


def _witness_sampling_phase(
    fclass: FunctionClass,
    params: LearnerParams,
    cert: games.GammaCertificate | None,
) -> tuple[games.GammaCertificate, np.ndarray, int]:
    """Shared setup of the coverage-sampling learners: certificate and m."""
    if cert is None:
        cert = games.gamma(fclass, params.alpha / 2.0)
    if cert.value <= 0.0:
        raise UnlearnableInstanceError(
            "coverage value is zero at alpha/2; no query budget can help"
        )
    m = math.ceil(math.log(2.0 / params.delta) / cert.value)
    return cert, cert.p_star, m


def _query_blocks(model: Model, arms, n_per: int, rng: np.random.Generator):
    """Query each listed arm ``n_per`` times consecutively; return the flat
    reward log and one estimate row per block (estimates filled by caller)."""
    arms = np.asarray(arms, dtype=np.int64)
    rewards = np.empty(arms.size * n_per)
    blocks = np.empty((arms.size, n_per))
    for i, arm in enumerate(arms):
        block = sample_rewards(model, int(arm), n_per, rng)
        blocks[i] = block
        rewards[i * n_per : (i + 1) * n_per] = block
    return np.repeat(arms, n_per), rewards, blocks


def run_empirical_mean_learner(
    fclass: FunctionClass,
    params: LearnerParams,
    model: Model,
    seed: int,
    cert: games.GammaCertificate | None = None,
) -> Transcript:
    """Coverage sampling with empirical-mean selection (bounded rewards).

    Draws m = ceil(ln(2/delta) / gamma_{alpha/2}) arms i.i.d. from the
    maximin witness at alpha/2, queries each ceil((8/alpha^2) ln(4m/delta))
    times, and returns the arm (among those drawn) with the largest empirical
    mean.  The total query count m * per_arm is fixed before the first reward
    is seen.  A precomputed certificate may be passed to skip the LP solve;
    it must be the alpha/2 certificate for this class.
    """
    _check_model(fclass, model)
    if not model.noise.bounded:
        raise ValueError("empirical-mean learner requires rewards bounded in [0, 1]")
    cert, p_star, m = _witness_sampling_phase(fclass, params, cert)
    n_per = chernoff_sample_count(params.alpha, params.delta, m)

    rng = np.random.default_rng(seed)
    drawn = p_star.sample(rng, m)
    arms_log, rewards, blocks = _query_blocks(model, drawn, n_per, rng)
    estimates = blocks.mean(axis=1)
    winner = int(drawn[int(np.argmax(estimates))])
    return Transcript(
        learner_name="empirical-mean",
        seed=seed,
        arms=arms_log,
        rewards=rewards,
        output_arm=winner,
        meta={"gamma": cert.value, "m": m, "per_arm": n_per},
    )


def run_median_of_means_learner(
    fclass: FunctionClass,
    params: LearnerParams,
    model: Model,
    seed: int,
    cert: games.GammaCertificate | None = None,
) -> Transcript:
    """Coverage sampling with median-of-means selection (variance-bounded rewards).

    Same arm-sampling phase as the empirical-mean learner; each drawn arm is
    queried ceil(16 c_m sigma^2 ln(2m/delta) / alpha^2) times and estimated by
    the median of ceil(ln(2/delta)) consecutive group means.
    """
    _check_model(fclass, model)
    if params.sigma is None:
        raise ValueError("median-of-means learner requires params.sigma")
    worst_var = max(
        model.noise.variance_bound(float(mu)) for mu in model.true_means
    )
    if worst_var > params.sigma**2 + 1e-12:
        raise ValueError("model reward variance exceeds the declared sigma^2")
    c_m = params.c_m if params.c_m is not None else DEFAULT_CM

    cert, p_star, m = _witness_sampling_phase(fclass, params, cert)
    n_per = median_of_means_sample_count(params.alpha, params.delta, m, params.sigma, c_m)
    groups = mom_groups(params.delta)
    if n_per < groups:
        raise ValueError(
            "per-arm budget smaller than the group count; sigma is too small "
            "for this alpha/delta"
        )
    mom_cfg = MoMConfig(groups=groups, c_m=c_m)

    rng = np.random.default_rng(seed)
    drawn = p_star.sample(rng, m)
    arms_log, rewards, blocks = _query_blocks(model, drawn, n_per, rng)
    estimates = np.array([median_of_means(block, mom_cfg) for block in blocks])
    winner = int(drawn[int(np.argmax(estimates))])
    return Transcript(
        learner_name="median-of-means",
        seed=seed,
        arms=arms_log,
        rewards=rewards,
        output_arm=winner,
        meta={"gamma": cert.value, "m": m, "per_arm": n_per, "groups": groups},
    )


def run_tree_descent(
    meta: TreeMeta,
    fclass: FunctionClass,
    params: LearnerParams,
    model: Model,
    seed: int,
) -> Transcript:
    """Adaptive descent on the binary-tree class.

    At each of the d internal stages the current node is queried
    ceil(18 ln(4 S / delta)) times (S = d + bucket_size stages in total) and
    the walk goes right iff the empirical mean clears 1/2; at the leaf each
    bucket arm is queried ceil((8/alpha^2) ln(4 S / delta)) times and the best
    empirical mean wins.  Total queries are d * node_count +
    bucket_size * leaf_count, logarithmic in the class size.
    """
    _check_model(fclass, model)
    if fclass.n_arms != meta.n_arms or fclass.n_functions != meta.n_functions:
        raise ValueError("function class does not match the tree geometry")
    if model.noise.kind not in ("deterministic", "bernoulli"):
        raise ValueError("tree descent expects deterministic or Bernoulli rewards")
    stages = meta.depth + meta.bucket_size
    log_term = math.log(4.0 * stages / params.delta)
    n_node = math.ceil(TREE_NODE_FACTOR * log_term)
    n_leaf = math.ceil(8.0 / (params.alpha * params.alpha) * log_term)

    rng = np.random.default_rng(seed)
    arms_chunks: list[np.ndarray] = []
    rewards_chunks: list[np.ndarray] = []
    path: list[int] = []
    for _ in range(meta.depth):
        arm = meta.internal_arm_of(path)
        block = sample_rewards(model, arm, n_node, rng)
        arms_chunks.append(np.full(n_node, arm, dtype=np.int64))
        rewards_chunks.append(block)
        path.append(1 if block.mean() >= TREE_THRESHOLD else 0)

    leaf = 0
    for bit in path:
        leaf = 2 * leaf + bit
    bucket = meta.bucket_arms_of(leaf)
    estimates = np.empty(len(bucket))
    for i, arm in enumerate(bucket):
        block = sample_rewards(model, arm, n_leaf, rng)
        arms_chunks.append(np.full(n_leaf, arm, dtype=np.int64))
        rewards_chunks.append(block)
        estimates[i] = block.mean()
    winner = bucket[int(np.argmax(estimates))]

    return Transcript(
        learner_name="tree-descent",
        seed=seed,
        arms=np.concatenate(arms_chunks),
        rewards=np.concatenate(rewards_chunks),
        output_arm=winner,
        meta={"leaf": leaf, "per_node": n_node, "per_leaf_arm": n_leaf},
    )


def run_non_adaptive_uniform(
    fclass: FunctionClass,
    budget: int,
    reps_per_arm: int,
    model: Model,
    seed: int,
) -> Transcript:
    """Fixed-schedule baseline: query positions chosen before any observation.

    Draws ``budget`` positions i.i.d. uniform over the arms, queries each
    position ``reps_per_arm`` times, pools the rewards per arm, and outputs
    the queried arm with the best pooled mean (least index on ties; arm 0 if
    the budget is zero).
    """
    _check_model(fclass, model)
    if budget < 0:
        raise ValueError("budget must be >= 0")
    if reps_per_arm < 1:
        raise ValueError("reps_per_arm must be >= 1")
    rng = np.random.default_rng(seed)
    n_arms = fclass.n_arms
    # the whole schedule is committed here, before the first reward
    positions = rng.integers(0, n_arms, size=budget)
    arms_log = np.repeat(positions, reps_per_arm)

    if arms_log.size == 0:
        return Transcript(
            learner_name="non-adaptive-uniform",
            seed=seed,
            arms=np.empty(0, dtype=np.int64),
            rewards=np.empty(0),
            output_arm=0,
            meta={"budget": budget, "reps_per_arm": reps_per_arm},
        )

    rewards = np.empty(arms_log.size)
    offset = 0
    for pos in positions:
        rewards[offset : offset + reps_per_arm] = sample_rewards(
            model, int(pos), reps_per_arm, rng
        )
        offset += reps_per_arm

    sums = np.zeros(n_arms)
    counts = np.zeros(n_arms)
    np.add.at(sums, arms_log, rewards)
    np.add.at(counts, arms_log, 1.0)
    pooled = np.where(counts > 0, sums / np.maximum(counts, 1.0), -np.inf)
    winner = int(np.argmax(pooled))
    return Transcript(
        learner_name="non-adaptive-uniform",
        seed=seed,
        arms=arms_log,
        rewards=rewards,
        output_arm=winner,
        meta={"budget": budget, "reps_per_arm": reps_per_arm},
    )


class OnlineRegressionOracle:
    """Exponential-weights online regression over a finite class.

    Squared loss, learning rate 1/2.  The prediction after any history is the
    weight mixture of the class rows, i.e. an element of the convex hull.  A
    function consistent with every observation never loses relative weight.
    """

    def __init__(self, fclass: FunctionClass, learning_rate: float = 0.5):
        if not learning_rate > 0:
            raise ValueError("learning rate must be positive")
        self._means = fclass.means
        self._eta = learning_rate
        self._cum_loss = np.zeros(fclass.n_functions)

    def update(self, arm: int, reward: float) -> None:
        if not 0 <= arm < self._means.shape[1]:
            raise IndexError(f"arm {arm} out of range")
        diff = self._means[:, arm] - reward
        self._cum_loss += diff * diff

    @property
    def weights(self) -> np.ndarray:
        shifted = self._cum_loss - self._cum_loss.min()
        w = np.exp(-self._eta * shifted)
        return w / w.sum()

    def predict(self) -> np.ndarray:
        """Mean-reward prediction per arm: the weight mixture of class rows."""
        return self.weights @ self._means


def online_regression_weights(fclass: FunctionClass, history) -> np.ndarray:
    """Mixture weights of the exponential-weights oracle after a history of
    (arm, reward) pairs; uniform on an empty history."""
    oracle = OnlineRegressionOracle(fclass)
    for arm, reward in history:
        oracle.update(int(arm), float(reward))
    return oracle.weights


def est_bound(n_functions: int, delta: float) -> float:
    """Declared cumulative squared-estimation-error bound of the oracle:
    4 ln|class| + 16 ln(2/delta), valid with probability 1 - delta on
    realizable data."""
    if n_functions < 1:
        raise ValueError("class size must be >= 1")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    return 4.0 * math.log(n_functions) + 16.0 * math.log(2.0 / delta)


def run_e2d(
    fclass: FunctionClass,
    params: LearnerParams,
    model: Model,
    seed: int,
    search_resolution: float = 0.25,
) -> Transcript:
    """Estimation-to-decisions learner for general finite classes.

    Phases, with L = ceil(log2(4/delta)) and J = floor(horizon / (L + 1)):

    1. Exploration (J rounds): the oracle's current mixture anchors a
       radius-eps_bar version set; the candidate search picks (p_t, q_t)
       minimizing the worst in-set probability of exceeding the alpha/2 gap;
       one arm is drawn from q_t and fed back to the oracle.
    2. Exploitation (L branches of J fresh draws each): L exploration rounds
       are sampled uniformly; each branch replays its q with a fresh oracle
       and averages the predictions; the branch whose average best matches
       its exploration anchor (in q-weighted squared error) is selected.
    3. Coverage sampling: the selected round's p becomes the witness; its
       in-set worst-case coverage gives the effective gamma; then the
       empirical-mean final phase runs with m = ceil(ln(2/delta) / gamma).

    A non-positive effective gamma aborts the final phase and records the
    ``dec-too-large`` error tag in the transcript instead of failing silently.
    No positive-coverage precondition is required up front.
    """
    _check_model(fclass, model)
    if params.horizon is None:
        raise ValueError("e2d learner requires params.horizon")
    L = math.ceil(math.log2(4.0 / params.delta))
    if params.horizon < L + 1:
        raise ValueError(f"horizon must be at least L + 1 = {L + 1}")
    J = params.horizon // (L + 1)
    half_alpha = params.alpha / 2.0
    bound = est_bound(fclass.n_functions, params.delta / (4.0 * L))
    eps_bar = 8.0 * math.sqrt(L / params.horizon * bound)
    B_half = gap_matrix(fclass, half_alpha).astype(float)
    true_means = model.true_means

    rng = np.random.default_rng(seed)
    arms_chunks: list[np.ndarray] = []
    rewards_chunks: list[np.ndarray] = []

    # With eps_bar >= 1 the version set is the whole class for every anchor
    # and every q, so the search result is round-independent: solve once.
    fixed = dec_at(fclass, np.full(fclass.n_functions, 1.0 / fclass.n_functions),
                   eps_bar, half_alpha, search_resolution) if eps_bar >= 1.0 else None

    oracle = OnlineRegressionOracle(fclass)
    p_hist: list[np.ndarray] = []
    q_hist: list[ArmDistribution] = []
    fhat_hist: list[np.ndarray] = []
    weight_hist: list[np.ndarray] = []
    est_error = 0.0
    explore_arms = np.empty(J, dtype=np.int64)
    explore_rewards = np.empty(J)
    for t in range(J):
        w = oracle.weights
        fhat = w @ fclass.means
        if fixed is not None:
            p_t, q_t = fixed.p_witness.probs, fixed.q_witness
        else:
            res = dec_at(fclass, w, eps_bar, half_alpha, search_resolution)
            p_t, q_t = res.p_witness.probs, res.q_witness
        p_hist.append(p_t)
        q_hist.append(q_t)
        fhat_hist.append(fhat)
        weight_hist.append(w)
        est_error += float(q_t.probs @ (true_means - fhat) ** 2)

        arm = q_t.sample(rng)
        reward = float(sample_rewards(model, arm, 1, rng)[0])
        explore_arms[t] = arm
        explore_rewards[t] = reward
        oracle.update(arm, reward)
    arms_chunks.append(explore_arms)
    rewards_chunks.append(explore_rewards)

    picked_rounds = rng.integers(0, J, size=L)
    scores = np.empty(L)
    for branch in range(L):
        t = int(picked_rounds[branch])
        q = q_hist[t]
        fresh = OnlineRegressionOracle(fclass)
        tilde_sum = np.zeros(fclass.n_arms)
        branch_arms = q.sample(rng, J)
        branch_rewards = np.empty(J)
        for j in range(J):
            tilde_sum += fresh.predict()
            arm = int(branch_arms[j])
            reward = float(sample_rewards(model, arm, 1, rng)[0])
            branch_rewards[j] = reward
            fresh.update(arm, reward)
        tilde = tilde_sum / J
        scores[branch] = float(q.probs @ (fhat_hist[t] - tilde) ** 2)
        arms_chunks.append(branch_arms.astype(np.int64))
        rewards_chunks.append(branch_rewards)

    best_branch = int(np.argmin(scores))
    chosen = int(picked_rounds[best_branch])
    p_hat = p_hist[chosen]
    q_hat = q_hist[chosen]
    versions = version_set(fclass, weight_hist[chosen], q_hat, eps_bar)
    if versions.is_empty:
        eff_gamma = 1.0
    else:
        eff_gamma = float((B_half[versions.members] @ p_hat).min())

    meta = {
        "L": L,
        "J": J,
        "eps_bar": eps_bar,
        "est_error": est_error,
        "est_bound": bound,
        "selection_scores": scores.tolist(),
        "chosen_round": chosen,
        "effective_gamma": eff_gamma,
    }

    if eff_gamma <= 0.0:
        meta["error"] = "dec-too-large"
        return Transcript(
            learner_name="e2d",
            seed=seed,
            arms=np.concatenate(arms_chunks),
            rewards=np.concatenate(rewards_chunks),
            output_arm=int(np.argmax(fhat_hist[chosen])),
            meta=meta,
        )

    m = math.ceil(math.log(2.0 / params.delta) / eff_gamma)
    n_per = chernoff_sample_count(params.alpha, params.delta, m)
    drawn = ArmDistribution(p_hat).sample(rng, m)
    final_arms, final_rewards, blocks = _query_blocks(model, drawn, n_per, rng)
    estimates = blocks.mean(axis=1)
    winner = int(drawn[int(np.argmax(estimates))])
    arms_chunks.append(final_arms)
    rewards_chunks.append(final_rewards)
    meta.update({"m": m, "per_arm": n_per})

    return Transcript(
        learner_name="e2d",
        seed=seed,
        arms=np.concatenate(arms_chunks),
        rewards=np.concatenate(rewards_chunks),
        output_arm=winner,
        meta=meta,
    )
