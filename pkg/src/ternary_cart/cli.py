"""``bench`` command line: run benchmarks, generate data, fit and export trees."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import data as data_mod
from .bench import ConfigError, emit_report, export_tree, load_config, run_benchmark
from .delta import DeltaKind, DeltaMethod
from .predict import RoutingMode
from .tree import Architecture, FitParams, FittedTree, fit_dataset

OUT_ENV = "TERNARY_BENCH_OUT"


def _out_dir(arg):
    return Path(arg or os.environ.get(OUT_ENV) or "bench_out")


def cmd_run(args) -> int:
    try:
        config = load_config(args.config)
    except (OSError, ConfigError, ValueError) as exc:
        print(json.dumps({"error": "config", "detail": str(exc)}), file=sys.stderr)
        return 2
    if args.jobs is not None:
        config.n_jobs = args.jobs
    if args.export_trees:
        config.export_trees = True
    report = run_benchmark(config)
    out = _out_dir(args.out)
    emit_report(report, out)
    if not args.quiet:
        print((out / "summary.txt").read_text(encoding="utf-8"), end="")
    if report.skipped_datasets and args.strict:
        print(json.dumps({"error": "datasets_aborted", "datasets": report.skipped_datasets}, sort_keys=True),
              file=sys.stderr)
        return 1
    return 0


def cmd_gen(args) -> int:
    kwargs = {"noise": args.noise} if args.dataset == "two_moons" else {}
    ds = data_mod.generate(args.dataset, args.n, seed=args.seed, **kwargs)
    text = data_mod.write_csv(ds, None, args.label)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text, encoding="utf-8")
    return 0


def cmd_fit(args) -> int:
    if args.data == "diabetes":
        ds = data_mod.load_diabetes()
    elif args.data in data_mod.GENERATORS:
        ds = data_mod.generate(args.data, args.n, seed=args.seed)
    else:
        ds = data_mod.load_csv(args.data, args.label)
    X = ds.features
    if args.standardize:
        X = data_mod.standardize_fit(X).transform(X)
        ds = data_mod.Dataset(X, ds.labels, ds.weights, ds.feature_names, ds.class_names, ds.name)
    arch = Architecture.TRINARY if args.routing == RoutingMode.HARD_MIDDLE.value else Architecture.BINARY_TERNARY
    params = FitParams(args.max_depth, delta_method=DeltaMethod(DeltaKind(args.delta)),
                       architecture=arch, seed=args.seed)
    tree = fit_dataset(ds, params)
    text = tree.to_json()
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text, encoding="utf-8")
    return 0


def cmd_export_tree(args) -> int:
    tree = FittedTree.from_json(Path(args.model).read_text(encoding="utf-8"))
    text = export_tree(tree, args.format)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text, encoding="utf-8")
    return 0


def cmd_bayes(args) -> int:
    err = data_mod.estimate_bayes_error_mc(args.generator, args.samples, seed=args.seed)
    print(json.dumps({"generator": args.generator, "samples": args.samples, "seed": args.seed,
                      "bayes_error": err}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bench", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a cross-validated benchmark from a YAML config")
    r.add_argument("--config", required=True)
    r.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./bench_out)")
    r.add_argument("--jobs", type=int, help="worker processes for folds")
    r.add_argument("--export-trees", action="store_true", help="also write fold-0 trees as JSON and DOT")
    r.add_argument("--strict", action="store_true", help="exit 1 if any dataset failed to load")
    r.add_argument("--quiet", action="store_true")
    r.set_defaults(func=cmd_run)

    g = sub.add_parser("gen", help="write a synthetic dataset as CSV")
    g.add_argument("--dataset", required=True, choices=sorted(data_mod.GENERATORS))
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=42)
    g.add_argument("--noise", type=float, default=0.2, help="two_moons only")
    g.add_argument("--label", default="class")
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    f = sub.add_parser("fit", help="fit one tree on all rows and write its JSON")
    f.add_argument("--data", required=True, help="CSV path, 'diabetes', or a generator name")
    f.add_argument("--label", default="class")
    f.add_argument("--n", type=int, default=1000, help="rows when --data is a generator")
    f.add_argument("--delta", default="margin", choices=[k.value for k in DeltaKind])
    f.add_argument("--routing", default="probabilistic",
                   choices=[m.value for m in RoutingMode if m is not RoutingMode.BINARY])
    f.add_argument("--max-depth", type=int, default=4)
    f.add_argument("--seed", type=int, default=42)
    f.add_argument("--standardize", action="store_true")
    f.add_argument("--out")
    f.set_defaults(func=cmd_fit)

    e = sub.add_parser("export-tree", help="convert a fitted tree JSON to DOT or canonical JSON")
    e.add_argument("--model", required=True)
    e.add_argument("--format", default="dot", choices=["dot", "json"])
    e.add_argument("--out")
    e.set_defaults(func=cmd_export_tree)

    b = sub.add_parser("bayes", help="Monte Carlo Bayes error of a generator's optimal rule")
    b.add_argument("--generator", required=True, choices=sorted(data_mod.BAYES_ORACLES))
    b.add_argument("--samples", type=int, default=1_000_000)
    b.add_argument("--seed", type=int, default=42)
    b.set_defaults(func=cmd_bayes)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
