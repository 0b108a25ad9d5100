"""Cross-validated benchmark runner, report writers and tree export.

A run compares every configured (delta method, routing) combination
with a depth-matched binary CART baseline on identical standardised
folds. Configuration is a small YAML document::

    seed: 42
    k_folds: 5
    max_depth: 4
    node_bootstrap_size_cap: 20000
    datasets:
      - {name: twonorm, generator: twonorm, n: 7400}
      - {name: diabetes, bundled: diabetes}
      - {name: mine, csv: data/mine.csv, label: target}
    methods:
      - {delta: margin, routing: probabilistic}
      - {delta: node_bootstrap, routing: hard_middle}

Relative CSV paths are resolved against the config file's directory.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import yaml

from . import data as data_mod
from .delta import DeltaKind, DeltaMethod
from .metrics import (
    PRACTICAL_THRESHOLD,
    MetricsReport,
    UndefinedMetricError,
    compute_metrics,
    efficiency,
    paired_comparison,
    recover_uncertain_accuracy,
    ub_ratio,
)
from .predict import RoutingMode, predict_batch
from .splitter import Criterion
from .tree import Architecture, FitParams, FittedTree, fit

BASELINE = "cart"
ROUTING_ARCH = {
    RoutingMode.PROBABILISTIC: Architecture.BINARY_TERNARY,
    RoutingMode.DEFERRED: Architecture.BINARY_TERNARY,
    RoutingMode.HARD_MIDDLE: Architecture.TRINARY,
}
ROUTING_SHORT = {
    RoutingMode.PROBABILISTIC: "prob.",
    RoutingMode.DEFERRED: "def.",
    RoutingMode.HARD_MIDDLE: "h.m.",
    RoutingMode.BINARY: "ref.",
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class DatasetSpec:
    name: str
    generator: Optional[str] = None
    n: Optional[int] = None
    csv: Optional[str] = None
    label: str = "class"
    bundled: Optional[str] = None
    seed: Optional[int] = None
    # in-memory data for programmatic runs; not expressible in YAML
    data: Optional[data_mod.Dataset] = field(default=None, compare=False, repr=False)

    @property
    def bayes_error(self) -> Optional[float]:
        if self.generator is not None:
            return data_mod.BAYES_ERRORS.get(self.generator)
        return None

    def load(self, default_seed: int) -> data_mod.Dataset:
        if self.data is not None:
            return self.data
        if self.generator is not None:
            seed = default_seed if self.seed is None else self.seed
            return data_mod.generate(self.generator, int(self.n), seed=seed)
        if self.bundled is not None:
            if self.bundled != "diabetes":
                raise ConfigError(f"unknown bundled dataset {self.bundled!r}")
            return data_mod.load_diabetes()
        return data_mod.load_csv(self.csv, self.label)


@dataclass(frozen=True)
class MethodSpec:
    delta: DeltaMethod
    routing: RoutingMode = RoutingMode.PROBABILISTIC

    @property
    def architecture(self) -> Architecture:
        return ROUTING_ARCH[self.routing]

    @property
    def key(self) -> str:
        return f"{self.delta.name}/{self.routing.value}"


@dataclass
class BenchConfig:
    datasets: List[DatasetSpec]
    methods: List[MethodSpec]
    k_folds: int = 5
    max_depth: int = 4
    seed: int = 42
    criterion: Criterion = Criterion.GINI
    node_bootstrap_size_cap: int = 20000
    n_jobs: int = 1
    export_trees: bool = False

    def __post_init__(self):
        if self.k_folds < 2:
            raise ConfigError("k_folds must be at least 2")
        names = [d.name for d in self.datasets]
        dupes = sorted({n for n in names if names.count(n) > 1})
        if dupes:
            raise ConfigError(f"duplicate dataset names: {dupes}")
        keys = [m.key for m in self.methods]
        if len(set(keys)) != len(keys):
            raise ConfigError("duplicate (delta, routing) combinations in methods")
        self.criterion = Criterion(self.criterion)


_METHOD_PARAMS = ("epsilon", "q", "alpha", "margin_fallback", "plateau")


def parse_config(doc: dict, base_dir: Path = Path(".")) -> BenchConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a mapping")
    datasets = []
    for entry in doc.get("datasets", []):
        entry = dict(entry)
        if "name" not in entry:
            raise ConfigError(f"dataset entry without a name: {entry}")
        sources = [k for k in ("generator", "csv", "bundled") if k in entry]
        if len(sources) != 1:
            raise ConfigError(f"dataset {entry['name']!r} needs exactly one of generator/csv/bundled")
        if "generator" in entry and "n" not in entry:
            raise ConfigError(f"generator dataset {entry['name']!r} needs n")
        if "csv" in entry:
            p = Path(entry["csv"])
            entry["csv"] = str(p if p.is_absolute() else base_dir / p)
        unknown = set(entry) - {"name", "generator", "n", "csv", "label", "bundled", "seed"}
        if unknown:
            raise ConfigError(f"unknown dataset keys {sorted(unknown)}")
        datasets.append(DatasetSpec(**entry))

    methods = []
    for entry in doc.get("methods", []):
        entry = dict(entry)
        kind = DeltaKind(entry.pop("delta"))
        routing = RoutingMode(entry.pop("routing", "probabilistic"))
        if routing is RoutingMode.BINARY:
            raise ConfigError("binary routing is the baseline; it is always included")
        params = {k: entry.pop(k) for k in _METHOD_PARAMS if k in entry}
        if entry:
            raise ConfigError(f"unknown method keys {sorted(entry)}")
        methods.append(MethodSpec(DeltaMethod(kind, **params), routing))

    known = {"datasets", "methods", "k_folds", "max_depth", "seed", "criterion",
             "node_bootstrap_size_cap", "n_jobs", "export_trees"}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    scalars = {k: doc[k] for k in known - {"datasets", "methods"} if k in doc}
    return BenchConfig(datasets=datasets, methods=methods, **scalars)


def load_config(path) -> BenchConfig:
    path = Path(path)
    return parse_config(yaml.safe_load(path.read_text(encoding="utf-8")) or {}, path.parent)


# -- running -----------------------------------------------------------------------

@dataclass
class CellResult:
    dataset: str
    method: str
    routing: str
    folds: List[MetricsReport] = field(default_factory=list)
    skipped: Optional[str] = None

    @property
    def mean(self) -> Dict[str, float]:
        keys = ("dec_acc", "undec_rate", "acc_all", "f1_dec")
        return {k: float(np.mean([getattr(m, k) for m in self.folds])) for k in keys}

    @property
    def dec_acc_std(self) -> float:
        return float(np.std([m.dec_acc for m in self.folds]))


@dataclass
class RunReport:
    config: BenchConfig
    cells: Dict[Tuple[str, str], CellResult]
    skipped_datasets: Dict[str, str]
    trees: Dict[Tuple[str, str], FittedTree] = field(default_factory=dict)

    def method_keys(self) -> List[str]:
        return [BASELINE] + [m.key for m in self.config.methods]

    def dataset_names(self) -> List[str]:
        return [d.name for d in self.config.datasets if d.name not in self.skipped_datasets]

    def bayes_error(self, dataset: str) -> Optional[float]:
        for d in self.config.datasets:
            if d.name == dataset:
                return d.bayes_error
        return None

    def summary(self) -> List[dict]:
        """One row per method aggregated over datasets, in configuration order."""
        rows = []
        names = self.dataset_names()
        if not names:
            return rows
        base = {d: self.cells[(d, BASELINE)].mean for d in names}
        for key in self.method_keys():
            done = [d for d in names if self.cells[(d, key)].skipped is None]
            cell0 = self.cells[(names[0], key)]
            row = {"method": key.split("/")[0], "routing": cell0.routing,
                   "key": key, "n_datasets": len(done)}
            if not done:
                rows.append(row)
                continue
            means = [self.cells[(d, key)].mean for d in done]
            dec = np.array([m["dec_acc"] for m in means])
            und = np.array([m["undec_rate"] for m in means])
            row.update(
                dec_acc=float(dec.mean()),
                dec_acc_std=float(dec.std()),
                undec_rate=float(und.mean()),
                acc_all=float(np.mean([m["acc_all"] for m in means])),
                f1_dec=float(np.mean([m["f1_dec"] for m in means])),
            )
            if key != BASELINE:
                base_dec = [base[d]["dec_acc"] for d in done]
                paired = paired_comparison(dec.tolist(), base_dec, PRACTICAL_THRESHOLD)
                row.update(wins=paired.wins, ties=paired.ties, losses=paired.losses,
                           p_value=paired.p_value)
                per_ds = [efficiency(dec[i], base[d]["acc_all"], und[i]) for i, d in enumerate(done) if und[i] > 0]
                row["eta_mean_per_dataset"] = float(np.mean(per_ds)) if per_ds else None
                try:
                    row["eta_aggregate"] = efficiency(row["dec_acc"], float(np.mean(base_dec)), row["undec_rate"])
                except UndefinedMetricError:
                    row["eta_aggregate"] = None
            rows.append(row)
        return rows

    def dataset_rows(self) -> List[dict]:
        """Per (dataset, method) means, with U/B where a Bayes error is registered."""
        rows = []
        for d in self.dataset_names():
            be = self.bayes_error(d)
            for key in self.method_keys():
                cell = self.cells[(d, key)]
                row = {"dataset": d, "method": key.split("/")[0], "routing": cell.routing, "key": key,
                       "skipped": cell.skipped}
                if cell.skipped is None:
                    m = cell.mean
                    row.update(m, dec_acc_std=cell.dec_acc_std)
                    row["acc_u"] = (recover_uncertain_accuracy(m["acc_all"], m["dec_acc"], m["undec_rate"])
                                    if m["undec_rate"] > 0 else None)
                    if be is not None:
                        row["bayes_error"] = be
                        row["ub_ratio"] = ub_ratio(m["undec_rate"], be)
                rows.append(row)
        return rows


def _fold_task(args):
    X, y, k, train, test, fold, config, methods, skipped = args
    s = data_mod.standardize_fit(X[train])
    Xtr, Xte = s.transform(X[train]), s.transform(X[test])
    ytr, yte = y[train], y[test]
    out = {}
    trees = {}
    base_params = FitParams(config.max_depth, config.criterion, DeltaMethod(DeltaKind.ZERO),
                            Architecture.BINARY_TERNARY, config.seed)
    tree = fit(Xtr, ytr, base_params, n_classes=k)
    out[BASELINE] = compute_metrics(predict_batch(tree, Xte, RoutingMode.BINARY), yte, k)
    trees[BASELINE] = tree
    for m in methods:
        if m.key in skipped:
            continue
        params = replace(base_params, delta_method=m.delta, architecture=m.architecture)
        tree = fit(Xtr, ytr, params, n_classes=k)
        out[m.key] = compute_metrics(predict_batch(tree, Xte, m.routing), yte, k)
        trees[m.key] = tree
    return fold, out, trees if fold == 0 else {}


def run_benchmark(config: BenchConfig) -> RunReport:
    cells: Dict[Tuple[str, str], CellResult] = {}
    skipped_datasets: Dict[str, str] = {}
    kept_trees: Dict[Tuple[str, str], FittedTree] = {}

    for spec in config.datasets:
        try:
            ds = spec.load(config.seed)
            if ds.n_classes < 2:
                raise data_mod.DataError("dataset has fewer than two classes")
            plan = data_mod.stratified_kfold(ds.labels, config.k_folds, config.seed)
        except (OSError, ValueError, KeyError) as exc:
            skipped_datasets[spec.name] = f"load failed: {exc}"
            continue

        skipped = {}
        for m in config.methods:
            if m.delta.kind is DeltaKind.NODE_BOOTSTRAP and ds.n > config.node_bootstrap_size_cap:
                skipped[m.key] = f"size cap: N={ds.n} > {config.node_bootstrap_size_cap}"
        cells[(spec.name, BASELINE)] = CellResult(spec.name, BASELINE, RoutingMode.BINARY.value)
        for m in config.methods:
            cells[(spec.name, m.key)] = CellResult(spec.name, m.delta.name, m.routing.value,
                                                   skipped=skipped.get(m.key))

        tasks = [(ds.features, ds.labels, ds.n_classes, train, test, i, config, config.methods, skipped)
                 for i, (train, test) in enumerate(plan)]
        if config.n_jobs > 1:
            with ProcessPoolExecutor(max_workers=config.n_jobs) as pool:
                results = list(pool.map(_fold_task, tasks))
        else:
            results = [_fold_task(t) for t in tasks]
        for fold, out, trees in sorted(results, key=lambda r: r[0]):
            for key, report in out.items():
                cells[(spec.name, key)].folds.append(report)
            if config.export_trees:
                kept_trees.update({(spec.name, key): t for key, t in trees.items()})

    return RunReport(config, cells, skipped_datasets, kept_trees)


# -- reports -------------------------------------------------------------------------

FOLD_FIELDS = ["dataset", "method", "routing", "fold", "n", "dec_acc", "undec_rate", "acc_all",
               "f1_dec", "acc_u", "degenerate"]


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def report_csv(report: RunReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FOLD_FIELDS)
    for (d, key), cell in report.cells.items():
        for i, m in enumerate(cell.folds):
            w.writerow([_fmt(v) for v in (d, cell.method, cell.routing, i, m.n, m.dec_acc, m.undec_rate,
                                          m.acc_all, m.f1_dec, m.acc_u, m.degenerate)])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def report_dict(report: RunReport) -> dict:
    cfg = report.config
    return {
        "config": {
            "k_folds": cfg.k_folds,
            "max_depth": cfg.max_depth,
            "seed": cfg.seed,
            "criterion": cfg.criterion.value,
            "node_bootstrap_size_cap": cfg.node_bootstrap_size_cap,
            "datasets": [{k: v for k, v in vars(d).items() if v is not None and k != "data"}
                         for d in cfg.datasets],
            "methods": [{"delta": m.delta.name, "routing": m.routing.value} for m in cfg.methods],
        },
        "skipped_datasets": report.skipped_datasets,
        "cells": [
            {
                "dataset": d,
                "method": cell.method,
                "routing": cell.routing,
                "skipped": cell.skipped,
                "folds": [m.to_dict() for m in cell.folds],
            }
            for (d, _), cell in report.cells.items()
        ],
        "datasets": [{k: _jsonable(v) for k, v in r.items()} for r in report.dataset_rows()],
        "summary": [{k: _jsonable(v) for k, v in r.items()} for r in report.summary()],
    }


def report_json(report: RunReport) -> str:
    return json.dumps(report_dict(report), indent=2, sort_keys=True) + "\n"


def _pretty_method(key: str) -> str:
    if key == BASELINE:
        return "CART (baseline)"
    return key.split("/")[0].replace("_", "-").title()


def report_text(report: RunReport) -> str:
    lines = []
    head = f"{'Method':<18}{'Routing':<9}{'Dec.Acc':>9}{'±std':>8}{'Undec%':>8}{'Acc.All':>9}{'W/T/L':>10}"
    lines += ["Summary over datasets", head, "-" * len(head)]
    for row in report.summary():
        routing = ROUTING_SHORT[RoutingMode(row["routing"])]
        if "dec_acc" not in row:
            lines.append(f"{_pretty_method(row['key']):<18}{routing:<9}{'skipped':>9}")
            continue
        wtl = f"{row['wins']}/{row['ties']}/{row['losses']}" if "wins" in row else "ref."
        lines.append(f"{_pretty_method(row['key']):<18}{routing:<9}{row['dec_acc']:>9.4f}"
                     f"{row['dec_acc_std']:>8.3f}{100 * row['undec_rate']:>8.1f}{row['acc_all']:>9.4f}{wtl:>10}")

    lines += ["", "Per dataset"]
    head = f"{'Dataset':<14}{'Method':<18}{'Routing':<9}{'Dec.Acc':>9}{'Undec%':>8}{'Acc.All':>9}{'F1-Dec':>8}"
    any_ub = any(report.bayes_error(d) is not None for d in report.dataset_names())
    if any_ub:
        head += f"{'U/B':>8}"
    lines += [head, "-" * len(head)]
    for row in report.dataset_rows():
        routing = ROUTING_SHORT[RoutingMode(row["routing"])]
        prefix = f"{row['dataset']:<14}{_pretty_method(row['key']):<18}{routing:<9}"
        if row["skipped"]:
            lines.append(prefix + f"skipped ({row['skipped']})")
            continue
        line = prefix + (f"{row['dec_acc']:>9.4f}{100 * row['undec_rate']:>8.1f}"
                         f"{row['acc_all']:>9.4f}{row['f1_dec']:>8.3f}")
        if "ub_ratio" in row:
            line += f"{row['ub_ratio']:>8.2f}"
        lines.append(line)
    for name, reason in report.skipped_datasets.items():
        lines.append(f"{name:<14}skipped ({reason})")
    return "\n".join(lines) + "\n"


def emit_report(report: RunReport, out_dir, formats: Sequence[str] = ("csv", "json", "text")) -> List[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    writers = {"csv": ("folds.csv", report_csv), "json": ("report.json", report_json),
               "text": ("summary.txt", report_text)}
    for fmt in formats:
        name, fn = writers[fmt]
        path = out / name
        path.write_text(fn(report), encoding="utf-8")
        written.append(path)
    if report.trees:
        tree_dir = out / "trees"
        tree_dir.mkdir(exist_ok=True)
        for (d, key), tree in sorted(report.trees.items()):
            stem = f"{d}__{key.replace('/', '__')}"
            for fmt, suffix in (("json", ".json"), ("dot", ".dot")):
                path = tree_dir / (stem + suffix)
                path.write_text(export_tree(tree, fmt), encoding="utf-8")
                written.append(path)
    return written


# -- tree export -------------------------------------------------------------------

def _dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def tree_to_dot(tree: FittedTree, feature_names: Optional[Sequence[str]] = None,
                class_names: Optional[Sequence[str]] = None) -> str:
    """Graphviz source; middle-branch edges are dashed."""
    lines = ["digraph ternary_tree {", '  node [shape=box, fontname="Helvetica"];']
    trinary = tree.architecture is Architecture.TRINARY
    counter = [0]

    def fname(f):
        return feature_names[f] if feature_names else f"x{f}"

    def emit(node, shaded=False):
        nid = f"n{counter[0]}"
        counter[0] += 1
        style = ', style=filled, fillcolor="#fde0c5"' if shaded else ""
        if node.is_leaf:
            probs = ", ".join(f"{p:.3f}" for p in node.dist.probs)
            label = f"leaf n={node.n}\\np=[{probs}]"
            if class_names:
                label += f"\\nclass={_dot_escape(str(class_names[node.dist.argmax()]))}"
            lines.append(f'  {nid} [label="{label}"{style}];')
            return nid
        label = f"{_dot_escape(fname(node.feature))}, θ={node.theta:.4g}, δ={node.delta:.4g}"
        if not trinary and node.delta > 0:
            label += f"\\nblend [{node.theta - node.delta:.4g}, {node.theta + node.delta:.4g}]"
        lines.append(f'  {nid} [label="{label}"{style}];')
        left = emit(node.left, shaded)
        lines.append(f'  {nid} -> {left} [label="≤ {node.theta - node.delta:.4g}"];' if trinary
                     else f'  {nid} -> {left} [label="≤ {node.theta:.4g}"];')
        if node.middle is not None:
            mid = emit(node.middle, True)
            lines.append(f'  {nid} -> {mid} [label="zone", style=dashed, color="#e07b00"];')
        right = emit(node.right, shaded)
        lines.append(f'  {nid} -> {right} [label="> {node.theta + node.delta:.4g}"];' if trinary
                     else f'  {nid} -> {right} [label="> {node.theta:.4g}"];')
        return nid

    emit(tree.root)
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_tree(tree: FittedTree, fmt: str = "json", **kwargs) -> str:
    fmt = fmt.lower()
    if fmt == "json":
        return tree.to_json()
    if fmt == "dot":
        return tree_to_dot(tree, **kwargs)
    raise ValueError(f"unknown export format {fmt!r}; use 'json' or 'dot'")
