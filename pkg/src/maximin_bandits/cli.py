"""Command-line interface.

Subcommands mirror the library surface: ``gamma`` and ``dec`` solve the two
game values for a function class given as JSON, ``run``/``sweep`` execute
seeded Monte Carlo experiments, ``certify`` and ``adaptivity`` reproduce the
lower-bound constructions, and ``discretize`` builds the histogram
approximation of a Gaussian reward density.

All emitted JSON carries ``"meta": {"log_base": "natural"}``: every sample
count and confidence bound in this package uses natural logarithms.
"""

from __future__ import annotations

import argparse
import json
import sys

from .dec import default_anchor_candidates, dec_at, dec_sup
from .environments import make_gaussian_histogram, tv_distance, GaussianDensity
from .games import gamma
from .harness import (
    ExperimentConfig,
    adaptivity_experiment,
    build_function_class,
    certify_lower_bound,
    monte_carlo,
    sweep,
    tree_descent_prober,
)

META = {"log_base": "natural"}


def _load_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _emit(doc: dict, out_path: str | None) -> None:
    doc = dict(doc)
    doc["meta"] = META
    payload = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)


def _cmd_gamma(args) -> int:
    fclass, _ = build_function_class(_load_json(args.config))
    cert = gamma(fclass, args.alpha, tolerance=args.tolerance)
    _emit({"certificate": cert.to_json()}, args.out)
    return 0


def _cmd_dec(args) -> int:
    fclass, _ = build_function_class(_load_json(args.config))
    if args.anchors == "vertices":
        import numpy as np

        anchors = [np.eye(fclass.n_functions)[f] for f in range(fclass.n_functions)]
    elif args.anchors == "vertices+midpoints":
        anchors = default_anchor_candidates(fclass)
    else:
        doc = _load_json(args.anchors)
        anchors = doc["anchors"] if isinstance(doc, dict) else doc
    if args.sup:
        result = dec_sup(fclass, args.eps, args.alpha, anchors=anchors,
                         resolution=args.resolution)
    else:
        result = dec_at(fclass, anchors[0], args.eps, args.alpha,
                        resolution=args.resolution)
    _emit({"dec": result.to_json()}, args.out)
    return 0


def _cmd_run(args) -> int:
    doc = _load_json(args.config)
    if args.seed is not None:
        doc["seed"] = args.seed
    if args.trials is not None:
        doc["trials"] = args.trials
    if args.out is not None:
        doc["out"] = args.out
    if args.format is not None:
        doc["format"] = args.format
    result = monte_carlo(ExperimentConfig.from_json(doc))
    _emit(
        {
            "experiment_id": result.experiment_id,
            "trials": len(result.records),
            "success_rate": result.success_rate,
            "half_width99": result.half_width99,
            "mean_queries": result.mean_queries,
            "gamma": result.gamma_value,
            "out": doc.get("out"),
        },
        None,
    )
    return 0


def _cmd_sweep(args) -> int:
    doc = _load_json(args.config)
    if args.seed is not None:
        doc["seed"] = args.seed
    config = ExperimentConfig.from_json(doc)
    result = sweep(config, out_path=args.out)
    if not args.out:
        sys.stdout.write(result.to_csv())
    return 0


def _merged(args, defaults: dict, fields: tuple) -> dict:
    """Config document overridden by any explicitly passed CLI flags."""
    doc = dict(defaults)
    if args.config:
        doc.update(_load_json(args.config))
    for name in fields:
        value = getattr(args, name, None)
        if value is not None:
            doc[name] = value
    return doc


def _build_prober(fclass, meta, spec: dict):
    kind = spec.get("kind", "tree-descent")
    if kind == "tree-descent":
        if meta is None:
            raise ValueError("tree-descent prober requires a tree class")
        return tree_descent_prober(meta, reps_per_stage=int(spec.get("reps", 1)))
    if kind == "fixed-arm":
        from .harness import fixed_arm_prober

        return fixed_arm_prober(int(spec.get("arm", 0)))
    if kind == "witness":
        from .games import gamma as solve_gamma
        from .harness import witness_prober

        cert = solve_gamma(fclass, float(spec["alpha"]))
        return witness_prober(cert.p_star)
    raise ValueError(f"unknown prober kind {kind!r}")


def _cmd_certify(args) -> int:
    doc = _merged(
        args,
        {"class": {"constructor": "tree", "depth": 1, "bucket_size": 1},
         "prober": {"kind": "tree-descent", "reps": 1},
         "alpha": 0.2, "delta": 0.1, "trials": 10000, "seed": 0},
        ("alpha", "delta", "trials", "seed"),
    )
    if args.depth is not None:
        doc["class"] = {"constructor": "tree", "depth": args.depth,
                        "bucket_size": args.bucket_size or 1}
    fclass, meta = build_function_class(doc["class"])
    prober = _build_prober(fclass, meta, doc.get("prober", {}))
    report = certify_lower_bound(
        fclass, prober, float(doc["alpha"]), float(doc["delta"]),
        trials=int(doc["trials"]), seed=int(doc["seed"]),
    )
    _emit({"certify": report.to_json()}, args.out)
    return 0


def _cmd_adaptivity(args) -> int:
    doc = _merged(
        args,
        {"depth": 5, "trials": 2000, "seed": 0, "alpha": 0.2, "delta": 0.1},
        ("depth", "trials", "seed", "alpha", "delta"),
    )
    report = adaptivity_experiment(
        int(doc["depth"]), trials=int(doc["trials"]), seed=int(doc["seed"]),
        alpha=float(doc["alpha"]), delta=float(doc["delta"]),
    )
    _emit({"adaptivity": report.to_json()}, args.out)
    return 0


def _cmd_discretize(args) -> int:
    doc = _merged(
        args,
        {"mu": 0.0, "sigma": 1.0, "eps": 0.1, "step": 1e-3},
        ("mu", "sigma", "eps", "step"),
    )
    mu, sigma, eps = float(doc["mu"]), float(doc["sigma"]), float(doc["eps"])
    hist = make_gaussian_histogram(mu, sigma, eps)
    tv = tv_distance(hist, GaussianDensity(mu, sigma), step=float(doc["step"]))
    _emit(
        {
            "histogram": hist.to_json(),
            "buckets": len(hist.masses),
            "tv_distance": tv,
            "tv_within_eps": bool(tv <= eps),
            "eps": eps,
        },
        args.out,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maximin-bandits",
        description="Coverage games, bandit learners, and lower-bound experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gamma", help="solve the maximin coverage game for a class")
    p.add_argument("--config", required=True, help="function class JSON")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--tolerance", type=float, default=1e-9)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_gamma)

    p = sub.add_parser("dec", help="decision-estimation value at an anchor or its sup")
    p.add_argument("--config", required=True, help="function class JSON")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--resolution", type=float, default=0.1)
    p.add_argument(
        "--anchors",
        default="vertices+midpoints",
        help="'vertices', 'vertices+midpoints', or a JSON file of anchor rows",
    )
    p.add_argument("--sup", action="store_true",
                   help="maximize over anchors instead of using the first one")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_dec)

    p = sub.add_parser("run", help="run a Monte Carlo experiment config")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"))
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep", help="cartesian parameter sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("certify", help="coin-flip lower-bound certification")
    p.add_argument("--config", help="JSON with class, prober, alpha, delta, trials, seed")
    p.add_argument("--depth", type=int, help="shortcut: tree class of this depth")
    p.add_argument("--bucket-size", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_certify)

    p = sub.add_parser("adaptivity", help="adaptive vs non-adaptive separation")
    p.add_argument("--config")
    p.add_argument("--depth", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_adaptivity)

    p = sub.add_parser("discretize", help="histogram approximation of a Gaussian")
    p.add_argument("--config")
    p.add_argument("--mu", type=float)
    p.add_argument("--sigma", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--step", type=float)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_discretize)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
