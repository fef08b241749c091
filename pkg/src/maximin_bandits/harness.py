"""Seeded Monte Carlo experiments, certification runs, and persistence.

Every experiment is a pure function of (config, master seed): trial i runs on
the derived seed ``trial_seed(master, i)``, records are persisted in trial
order, and repeated executions produce byte-identical output files.  Wall
times are measured only when ``record_runtime`` is set, because persisted
timings would break reproducibility; by default the runtime column is 0.

Workers: trials run on a thread pool capped by the ``MB_THREADS`` environment
variable (default 1); results are identical to the serial order.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import games
from .core import (
    ArmDistribution,
    FunctionClass,
    Model,
    NoiseSpec,
    Transcript,
    gap_matrix,
    trial_seed,
)
from .environments import TreeMeta, make_k_armed, make_linear_net_class, make_singletons, make_tree_class
from .learners import (
    LearnerParams,
    run_e2d,
    run_empirical_mean_learner,
    run_median_of_means_learner,
    run_non_adaptive_uniform,
    run_tree_descent,
)

__all__ = [
    "CSV_COLUMNS",
    "TrialRecord",
    "ExperimentConfig",
    "MonteCarloResult",
    "CertifyReport",
    "AdaptivityReport",
    "SweepResult",
    "build_function_class",
    "monte_carlo",
    "certify_lower_bound",
    "adaptivity_experiment",
    "sweep",
    "save_trial_records",
    "records_to_csv",
    "tree_descent_prober",
    "fixed_arm_prober",
    "witness_prober",
    "worker_count",
]

CSV_COLUMNS = [
    "experiment_id",
    "seed",
    "trial",
    "learner",
    "class",
    "alpha",
    "delta",
    "queries",
    "success",
    "output_arm",
    "gamma",
    "runtime_ms",
]

#: Hard cap on per-trial budgets accepted by the lower-bound certifier: the
#: output-distribution argument enumerates binary answer strings, so the
#: certified floor (1 - delta) / 2^T is vacuous beyond small T.
CERTIFY_BUDGET_CAP = 20

Z_99 = 2.5758293035489004  # two-sided 99% normal quantile


def worker_count() -> int:
    try:
        n = int(os.environ.get("MB_THREADS", "1"))
    except ValueError:
        return 1
    return max(1, n)


@dataclass(frozen=True)
class TrialRecord:
    """One learner run reduced to the persisted summary row."""

    experiment_id: str
    seed: int
    trial: int
    learner: str
    class_name: str
    alpha: float
    delta: float
    queries: int
    success: bool
    output_arm: int
    gamma_value: float
    runtime_ms: float
    error: str = ""

    def csv_row(self) -> list[str]:
        return [
            self.experiment_id,
            str(self.seed),
            str(self.trial),
            self.learner,
            self.class_name,
            repr(self.alpha),
            repr(self.delta),
            str(self.queries),
            "true" if self.success else "false",
            str(self.output_arm),
            repr(self.gamma_value),
            repr(self.runtime_ms),
        ]

    def to_json(self) -> dict:
        doc = {
            "experiment_id": self.experiment_id,
            "seed": self.seed,
            "trial": self.trial,
            "learner": self.learner,
            "class": self.class_name,
            "alpha": self.alpha,
            "delta": self.delta,
            "queries": self.queries,
            "success": self.success,
            "output_arm": self.output_arm,
            "gamma": self.gamma_value,
            "runtime_ms": self.runtime_ms,
        }
        if self.error:
            doc["error"] = self.error
        return doc


def records_to_csv(records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        writer.writerow(rec.csv_row())
    return buf.getvalue()


def save_trial_records(records, path: str, fmt: str = "csv") -> None:
    """Persist trial records in trial order; deterministic bytes."""
    if fmt == "csv":
        payload = records_to_csv(records)
    elif fmt == "json":
        payload = json.dumps([rec.to_json() for rec in records], indent=2) + "\n"
    else:
        raise ValueError(f"unknown format {fmt!r}")
    with open(path, "w", newline="") as fh:
        fh.write(payload)


def build_function_class(spec: dict) -> tuple[FunctionClass, TreeMeta | None]:
    """Materialize a function class from a JSON spec.

    Either an inline matrix ({"means": [[...]], ...}) or a named constructor:
    {"constructor": "k-armed" | "singletons" | "tree" | "linear-net", ...}.
    """
    if "means" in spec:
        return FunctionClass.from_json(spec), None
    ctor = spec.get("constructor")
    if ctor == "k-armed":
        return make_k_armed(int(spec["k"])), None
    if ctor == "singletons":
        return make_singletons(int(spec["n"])), None
    if ctor == "tree":
        return make_tree_class(int(spec["depth"]), int(spec["bucket_size"]))
    if ctor == "linear-net":
        return make_linear_net_class(int(spec["dimension"]), float(spec["alpha"])), None
    raise ValueError(f"unknown class spec {spec!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    """A Monte Carlo experiment: class, noise, learner, trial count, seed.

    ``true_function`` fixes the model row for every trial; None draws it
    uniformly per trial (from the trial's model stream).  ``record_runtime``
    opts into wall-clock timings at the cost of byte-reproducible outputs.
    """

    class_spec: dict
    noise: NoiseSpec
    learner: str
    params: LearnerParams
    trials: int
    seed: int
    true_function: int | None = None
    experiment_id: str | None = None
    out_path: str | None = None
    format: str = "csv"
    record_runtime: bool = False
    grid: dict | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.learner not in _DISPATCH:
            raise ValueError(f"unknown learner {self.learner!r}")
        if self.format not in ("csv", "json"):
            raise ValueError("format must be csv or json")

    def resolved_id(self, fclass: FunctionClass) -> str:
        if self.experiment_id:
            return self.experiment_id
        return f"{self.learner}-{fclass.family}"

    @classmethod
    def from_json(cls, doc: dict) -> "ExperimentConfig":
        return cls(
            class_spec=doc["class"],
            noise=NoiseSpec.from_json(doc["noise"]),
            learner=doc["learner"],
            params=LearnerParams.from_json(doc["params"]),
            trials=int(doc.get("trials", 100)),
            seed=int(doc.get("seed", 0)),
            true_function=doc.get("true_function"),
            experiment_id=doc.get("experiment_id"),
            out_path=doc.get("out"),
            format=doc.get("format", "csv"),
            record_runtime=bool(doc.get("record_runtime", False)),
            grid=doc.get("grid"),
        )


def _dispatch_empirical_mean(ctx, model, seed):
    return run_empirical_mean_learner(ctx.fclass, ctx.config.params, model, seed, cert=ctx.cert)


def _dispatch_mom(ctx, model, seed):
    return run_median_of_means_learner(ctx.fclass, ctx.config.params, model, seed, cert=ctx.cert)


def _dispatch_tree(ctx, model, seed):
    if ctx.meta is None:
        raise ValueError("tree-descent requires a tree-constructed class")
    return run_tree_descent(ctx.meta, ctx.fclass, ctx.config.params, model, seed)


def _dispatch_non_adaptive(ctx, model, seed):
    params = ctx.config.params
    if params.budget is None:
        raise ValueError("non-adaptive-uniform requires params.budget")
    return run_non_adaptive_uniform(ctx.fclass, params.budget, params.reps_per_arm, model, seed)


def _dispatch_e2d(ctx, model, seed):
    return run_e2d(ctx.fclass, ctx.config.params, model, seed)


_DISPATCH = {
    "empirical-mean": _dispatch_empirical_mean,
    "median-of-means": _dispatch_mom,
    "tree-descent": _dispatch_tree,
    "non-adaptive-uniform": _dispatch_non_adaptive,
    "e2d": _dispatch_e2d,
}

#: Learners whose sampling mixture is computed at alpha/2; the others are
#: reported against the coverage value at alpha itself.
_HALF_ALPHA_LEARNERS = ("empirical-mean", "median-of-means", "e2d")


@dataclass(eq=False)
class _RunContext:
    config: ExperimentConfig
    fclass: FunctionClass
    meta: TreeMeta | None
    cert: games.GammaCertificate | None
    gamma_value: float
    experiment_id: str


@dataclass(frozen=True, eq=False)
class MonteCarloResult:
    records: list
    success_rate: float
    mean_queries: float
    half_width99: float
    gamma_value: float
    experiment_id: str


def _prepare_context(config: ExperimentConfig) -> _RunContext:
    fclass, meta = build_function_class(config.class_spec)
    if config.learner in _HALF_ALPHA_LEARNERS:
        cert = games.gamma(fclass, config.params.alpha / 2.0)
    else:
        cert = games.gamma(fclass, config.params.alpha)
    shared = cert if config.learner in ("empirical-mean", "median-of-means") else None
    return _RunContext(
        config=config,
        fclass=fclass,
        meta=meta,
        cert=shared,
        gamma_value=cert.value,
        experiment_id=config.resolved_id(fclass),
    )


def _run_trial(ctx: _RunContext, index: int) -> TrialRecord:
    config = ctx.config
    ts = trial_seed(config.seed, index)
    model_rng = np.random.default_rng(trial_seed(ts, 0))
    if config.true_function is None:
        true_f = int(model_rng.integers(ctx.fclass.n_functions))
    else:
        true_f = int(config.true_function)
    model = Model(ctx.fclass, true_f, config.noise)
    learner_seed = trial_seed(ts, 1)

    started = time.perf_counter() if config.record_runtime else 0.0
    error = ""
    try:
        transcript = _DISPATCH[config.learner](ctx, model, learner_seed)
    except (ValueError, RuntimeError) as exc:
        # contract violations surface as failed trials tagged with the reason
        elapsed = (time.perf_counter() - started) * 1e3 if config.record_runtime else 0.0
        return TrialRecord(
            experiment_id=ctx.experiment_id,
            seed=ts,
            trial=index,
            learner=config.learner,
            class_name=ctx.fclass.family,
            alpha=config.params.alpha,
            delta=config.params.delta,
            queries=0,
            success=False,
            output_arm=-1,
            gamma_value=ctx.gamma_value,
            runtime_ms=elapsed,
            error=str(exc),
        )
    elapsed = (time.perf_counter() - started) * 1e3 if config.record_runtime else 0.0

    row = model.true_means
    success = bool(row.max() - row[transcript.output_arm] <= config.params.alpha)
    if "error" in transcript.meta:
        error = str(transcript.meta["error"])
    return TrialRecord(
        experiment_id=ctx.experiment_id,
        seed=ts,
        trial=index,
        learner=config.learner,
        class_name=ctx.fclass.family,
        alpha=config.params.alpha,
        delta=config.params.delta,
        queries=transcript.total_queries,
        success=success,
        output_arm=int(transcript.output_arm),
        gamma_value=ctx.gamma_value,
        runtime_ms=elapsed,
        error=error,
    )


def monte_carlo(config: ExperimentConfig) -> MonteCarloResult:
    """Run ``config.trials`` independent seeded trials and aggregate.

    Records are produced (and persisted, when ``out_path`` is set) in trial
    order regardless of the worker count, so output bytes depend only on
    (config, seed).  The reported half-width is the 99% normal-approximation
    interval of the success frequency.
    """
    ctx = _prepare_context(config)
    indices = range(config.trials)
    workers = worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(lambda i: _run_trial(ctx, i), indices))
    else:
        records = [_run_trial(ctx, i) for i in indices]
    records.sort(key=lambda r: r.trial)

    successes = sum(1 for r in records if r.success)
    rate = successes / len(records)
    half = Z_99 * math.sqrt(rate * (1.0 - rate) / len(records))
    result = MonteCarloResult(
        records=records,
        success_rate=rate,
        mean_queries=float(np.mean([r.queries for r in records])),
        half_width99=half,
        gamma_value=ctx.gamma_value,
        experiment_id=ctx.experiment_id,
    )
    if config.out_path:
        save_trial_records(records, config.out_path, config.format)
    return result


# ---------------------------------------------------------------------------
# Lower-bound certification


@dataclass(frozen=True, eq=False)
class CertifyReport:
    """Outcome of a coin-flip certification run.

    ``certified`` states whether the worst-case coverage of the empirical
    output distribution clears (1 - delta) / 2^budget minus three binomial
    standard deviations.
    """

    output_distribution: ArmDistribution
    min_coverage: float
    worst_function: int
    bound: float
    slack: float
    budget: int
    trials: int
    certified: bool

    def to_json(self) -> dict:
        return {
            "output_distribution": [float(v) for v in self.output_distribution.probs],
            "min_coverage": self.min_coverage,
            "worst_function": self.worst_function,
            "bound": self.bound,
            "slack": self.slack,
            "budget": self.budget,
            "trials": self.trials,
            "certified": self.certified,
        }


def certify_lower_bound(
    fclass: FunctionClass,
    prober,
    alpha: float,
    delta: float,
    trials: int,
    seed: int,
) -> CertifyReport:
    """Feed a tiny-budget learner pure coin flips and certify its coverage.

    ``prober(query, rng) -> arm`` runs one trial, drawing observations only
    through ``query(arm)``; every answer is an independent Bernoulli(1/2),
    carrying no information about any function.  Over ``trials`` runs the
    empirical output distribution p_hat is accumulated, and the report checks

        min_f  P_{arm ~ p_hat}(arm is alpha-optimal for f)
            >= (1 - delta) / 2^T - slack

    with T the observed per-trial budget (must never exceed
    ``CERTIFY_BUDGET_CAP``) and slack three binomial standard deviations.
    Any learner that succeeds with probability 1 - delta on every in-class
    Bernoulli model must clear this floor, because its output can depend on
    at most 2^T equally likely answer strings.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    counts = np.zeros(fclass.n_arms)
    budget = 0
    for i in range(trials):
        rng = np.random.default_rng(trial_seed(seed, i))
        used = 0

        def query(arm: int) -> float:
            nonlocal used
            if not 0 <= arm < fclass.n_arms:
                raise IndexError(f"arm {arm} out of range")
            used += 1
            if used > CERTIFY_BUDGET_CAP:
                raise ValueError(
                    f"prober exceeded the certification budget cap {CERTIFY_BUDGET_CAP}"
                )
            return float(rng.random() < 0.5)

        output = prober(query, rng)
        if not 0 <= output < fclass.n_arms:
            raise IndexError("prober returned an invalid arm")
        counts[output] += 1.0
        budget = max(budget, used)

    p_hat = ArmDistribution(counts / trials)
    coverage = gap_matrix(fclass, alpha).astype(float) @ p_hat.probs
    worst = int(np.argmin(coverage))
    bound = (1.0 - delta) * 2.0 ** (-budget)
    slack = 3.0 * math.sqrt(bound * (1.0 - bound) / trials)
    return CertifyReport(
        output_distribution=p_hat,
        min_coverage=float(coverage[worst]),
        worst_function=worst,
        bound=bound,
        slack=slack,
        budget=budget,
        trials=trials,
        certified=bool(coverage[worst] >= bound - slack),
    )


def tree_descent_prober(meta: TreeMeta, reps_per_stage: int = 1):
    """Tree descent driven entirely through the certification query channel."""
    if reps_per_stage < 1:
        raise ValueError("reps_per_stage must be >= 1")

    def prober(query, rng) -> int:
        path = []
        for _ in range(meta.depth):
            arm = meta.internal_arm_of(path)
            mean = sum(query(arm) for _ in range(reps_per_stage)) / reps_per_stage
            path.append(1 if mean >= 0.5 else 0)
        leaf = 0
        for bit in path:
            leaf = 2 * leaf + bit
        bucket = meta.bucket_arms_of(leaf)
        estimates = [
            sum(query(arm) for _ in range(reps_per_stage)) / reps_per_stage for arm in bucket
        ]
        return bucket[int(np.argmax(estimates))]

    return prober


def fixed_arm_prober(arm: int):
    """Zero-query learner that always outputs the same arm."""

    def prober(query, rng) -> int:
        return arm

    return prober


def witness_prober(p: ArmDistribution):
    """Zero-query learner that outputs one draw from a fixed mixture."""

    def prober(query, rng) -> int:
        return p.sample(rng)

    return prober


# ---------------------------------------------------------------------------
# Adaptivity separation


@dataclass(frozen=True, eq=False)
class AdaptivityReport:
    """Head-to-head comparison on the depth-d tree with deterministic rewards.

    The non-adaptive baseline gets floor(1 / (10 gamma)) uniform positions;
    ``separation_holds`` checks its failure frequency clears 1/2 minus three
    binomial standard deviations while the adaptive walker keeps succeeding.
    """

    depth: int
    gamma_value: float
    trials: int
    non_adaptive_budget: int
    adaptive_success_rate: float
    adaptive_mean_queries: float
    non_adaptive_failure_rate: float
    slack: float
    separation_holds: bool
    adaptive_records: list
    non_adaptive_records: list

    def to_json(self) -> dict:
        return {
            "depth": self.depth,
            "gamma": self.gamma_value,
            "trials": self.trials,
            "non_adaptive_budget": self.non_adaptive_budget,
            "adaptive_success_rate": self.adaptive_success_rate,
            "adaptive_mean_queries": self.adaptive_mean_queries,
            "non_adaptive_failure_rate": self.non_adaptive_failure_rate,
            "slack": self.slack,
            "separation_holds": self.separation_holds,
        }


def adaptivity_experiment(
    depth: int,
    trials: int,
    seed: int,
    alpha: float = 0.2,
    delta: float = 0.1,
) -> AdaptivityReport:
    """Adaptive tree descent vs. the uniform fixed schedule on the same models.

    Single-slot buckets, deterministic rewards, the true leaf drawn uniformly
    per trial.  The baseline budget floor(1 / (10 gamma)) realizes the regime
    where any non-adaptive learner must fail at least half the time, while
    descent needs only logarithmically many queries in the class size.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    fclass, meta = make_tree_class(depth, 1)
    cert = games.gamma(fclass, alpha)
    budget = int(math.floor(1.0 / (10.0 * cert.value)))
    noise = NoiseSpec.deterministic()
    params = LearnerParams(alpha=alpha, delta=delta)

    adaptive_records = []
    non_adaptive_records = []
    adaptive_hits = 0
    non_adaptive_misses = 0
    query_total = 0
    for i in range(trials):
        ts = trial_seed(seed, i)
        model_rng = np.random.default_rng(trial_seed(ts, 0))
        true_f = int(model_rng.integers(fclass.n_functions))
        model = Model(fclass, true_f, noise)
        row = model.true_means

        t_adaptive = run_tree_descent(meta, fclass, params, model, trial_seed(ts, 1))
        ok = bool(row.max() - row[t_adaptive.output_arm] <= alpha)
        adaptive_hits += ok
        query_total += t_adaptive.total_queries
        adaptive_records.append(
            TrialRecord(
                experiment_id=f"adaptivity-d{depth}-tree-descent",
                seed=ts,
                trial=i,
                learner="tree-descent",
                class_name=fclass.family,
                alpha=alpha,
                delta=delta,
                queries=t_adaptive.total_queries,
                success=ok,
                output_arm=int(t_adaptive.output_arm),
                gamma_value=cert.value,
                runtime_ms=0.0,
            )
        )

        t_fixed = run_non_adaptive_uniform(fclass, budget, 1, model, trial_seed(ts, 2))
        ok_fixed = bool(row.max() - row[t_fixed.output_arm] <= alpha)
        non_adaptive_misses += not ok_fixed
        non_adaptive_records.append(
            TrialRecord(
                experiment_id=f"adaptivity-d{depth}-non-adaptive",
                seed=ts,
                trial=i,
                learner="non-adaptive-uniform",
                class_name=fclass.family,
                alpha=alpha,
                delta=delta,
                queries=t_fixed.total_queries,
                success=ok_fixed,
                output_arm=int(t_fixed.output_arm),
                gamma_value=cert.value,
                runtime_ms=0.0,
            )
        )

    failure_rate = non_adaptive_misses / trials
    slack = 3.0 * math.sqrt(0.25 / trials)
    return AdaptivityReport(
        depth=depth,
        gamma_value=cert.value,
        trials=trials,
        non_adaptive_budget=budget,
        adaptive_success_rate=adaptive_hits / trials,
        adaptive_mean_queries=query_total / trials,
        non_adaptive_failure_rate=failure_rate,
        slack=slack,
        separation_holds=bool(failure_rate >= 0.5 - slack),
        adaptive_records=adaptive_records,
        non_adaptive_records=non_adaptive_records,
    )


# ---------------------------------------------------------------------------
# Parameter sweeps


@dataclass(frozen=True, eq=False)
class SweepResult:
    cells: list
    columns: list

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for cell in self.cells:
            writer.writerow([str(cell[col]) for col in self.columns])
        return buf.getvalue()


def _apply_override(doc: dict, dotted: str, value) -> None:
    parts = dotted.split(".")
    node = doc
    for part in parts[:-1]:
        node = node.setdefault(part, {})
    node[parts[-1]] = value


def sweep(config: ExperimentConfig, out_path: str | None = None) -> SweepResult:
    """Cartesian parameter sweep of Monte Carlo cells.

    ``config.grid`` maps dotted config paths (e.g. "params.alpha",
    "class.depth", "noise.sigma") to value lists.  Each cell runs its own
    Monte Carlo on a seed derived from (master seed, cell index); a failing
    cell records its error and the sweep continues.
    """
    if not config.grid:
        raise ValueError("sweep requires a parameter grid")
    keys = sorted(config.grid)
    base = {
        "class": dict(config.class_spec),
        "noise": config.noise.to_json(),
        "learner": config.learner,
        "params": config.params.to_json(),
        "trials": config.trials,
        "true_function": config.true_function,
        "record_runtime": config.record_runtime,
    }
    columns = ["experiment_id", *keys, "trials", "success_rate", "mean_queries",
               "half_width99", "gamma", "error"]
    cells = []
    for idx, values in enumerate(itertools.product(*(config.grid[k] for k in keys))):
        doc = json.loads(json.dumps(base))  # deep copy of the plain-JSON config
        for key, value in zip(keys, values):
            _apply_override(doc, key, value)
        doc["seed"] = trial_seed(config.seed, idx)
        doc["experiment_id"] = f"{config.experiment_id or 'sweep'}-cell{idx}"
        cell = {col: "" for col in columns}
        cell.update({"experiment_id": doc["experiment_id"], "trials": config.trials})
        cell.update(dict(zip(keys, values)))
        try:
            result = monte_carlo(ExperimentConfig.from_json(doc))
            cell.update(
                {
                    "success_rate": result.success_rate,
                    "mean_queries": result.mean_queries,
                    "half_width99": result.half_width99,
                    "gamma": result.gamma_value,
                }
            )
        except (ValueError, RuntimeError) as exc:
            cell["error"] = str(exc)
        cells.append(cell)
    result = SweepResult(cells=cells, columns=columns)
    if out_path:
        with open(out_path, "w", newline="") as fh:
            fh.write(result.to_csv())
    return result
