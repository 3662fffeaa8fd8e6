"""Evaluation harness: grid search, repeated stratified CV, and reports.

The protocol per outer fold: an inner 5-fold grid search picks the ensemble
size/depth, the chosen ensemble is retrained on the full training partition,
an inner 3-fold search picks the simplifier hyperparameters per mode, and the
final simplified ruleset is scored on the held-out fold. Both modes always
consume the identical trained ensemble. Wall-clock timing covers simplify()
only.
"""

import csv
import hashlib
import itertools
import json
import logging
import time
from dataclasses import dataclass, field, fields

import numpy as np

from .dataset import Dataset, FoldPlan, stratified_folds
from .ensemble import TrainConfig, n_rules, predict_ensemble_batch, train_forest
from .errors import MissingModeError
from .metrics import accuracy_score, f1_score
from .simplify import SimplifyConfig, simplify

logger = logging.getLogger(__name__)

REPORT_COLUMNS = (
    "dataset", "repeat", "fold", "mode", "config_hash",
    "f1_train", "f1_test", "acc_train", "acc_test",
    "n_rules_final", "n_rules_ensemble", "total_conditions",
    "simplify_time_s", "ensemble_time_s",
)


@dataclass(frozen=True)
class GridSpec:
    """Hyperparameter axes for the ensemble and the simplifier.

    The default is the desk-scale subset; :meth:`full` is the complete
    published search space (a cluster-sized job under repeated CV).
    """

    n_trees: tuple = (10, 50, 100)
    max_depth: tuple = (2, 3, 4)
    eps_conf: tuple = (0.5, 0.95)
    eps_cov: tuple = (0.0, 0.01)
    conf_level_c: tuple = (0.25,)
    eta: tuple = (1.0,)
    tau: tuple = (0.0, 20.0)
    n0: tuple = (50.0,)

    def __post_init__(self):
        for f in fields(self):
            axis = getattr(self, f.name)
            if not isinstance(axis, tuple):
                object.__setattr__(self, f.name, tuple(axis))
            if not getattr(self, f.name):
                raise ValueError(f"grid axis {f.name} must be non-empty")

    @classmethod
    def full(cls) -> "GridSpec":
        return cls(
            n_trees=(10, 25, 50, 100, 250, 500),
            max_depth=(2, 3, 4, 5, 6),
            eps_conf=(0.5, 0.95),
            eps_cov=(0.0, 0.001, 0.01),
            conf_level_c=(0.10, 0.25, 0.40),
            eta=(0.3, 1.0, 3.0),
            tau=(0.0, 20.0),
            n0=(25.0, 50.0, 100.0),
        )

    @classmethod
    def from_json(cls, obj) -> "GridSpec":
        if isinstance(obj, str):
            with open(obj, encoding="utf-8") as fh:
                obj = json.load(fh)
        kwargs = {}
        ens = obj.get("ensemble", {})
        simp = obj.get("simplifier", {})
        for key in ("n_trees", "max_depth"):
            if key in ens:
                kwargs[key] = tuple(ens[key])
        rename = {"c": "conf_level_c"}
        for key in ("eps_conf", "eps_cov", "c", "conf_level_c", "eta", "tau", "n0"):
            if key in simp:
                kwargs[rename.get(key, key)] = tuple(simp[key])
        return cls(**kwargs)

    def ensemble_points(self):
        return list(itertools.product(self.n_trees, self.max_depth))

    def simplifier_points(self):
        return list(itertools.product(
            self.eps_conf, self.eps_cov, self.conf_level_c,
            self.eta, self.tau, self.n0))


@dataclass
class RunReport:
    """Per-fold result rows with a fixed, documented column order."""

    rows: list = field(default_factory=list)

    def append(self, **kwargs):
        missing = set(REPORT_COLUMNS) - set(kwargs)
        if missing:
            raise ValueError(f"missing report columns: {sorted(missing)}")
        self.rows.append({k: kwargs[k] for k in REPORT_COLUMNS})

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=REPORT_COLUMNS)
            writer.writeheader()
            writer.writerows(self.rows)

    @classmethod
    def from_csv(cls, path) -> "RunReport":
        report = cls()
        with open(path, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                for key in ("repeat", "fold", "n_rules_final", "n_rules_ensemble",
                            "total_conditions"):
                    row[key] = int(row[key])
                for key in ("f1_train", "f1_test", "acc_train", "acc_test",
                            "simplify_time_s", "ensemble_time_s"):
                    row[key] = float(row[key])
                report.rows.append(row)
        return report

    def modes(self):
        return sorted({row["mode"] for row in self.rows})


def config_hash(obj) -> str:
    return hashlib.md5(json.dumps(obj, sort_keys=True).encode()).hexdigest()[:12]


def _simplify_config(point, mode, support_unit, selection_metric) -> SimplifyConfig:
    eps_conf, eps_cov, c, eta, tau, n0 = point
    return SimplifyConfig(
        eps_conf=eps_conf, eps_cov=eps_cov, conf_level_c=c, eta=eta, tau=tau,
        n0=n0, mode=mode, support_unit=support_unit,
        selection_metric=selection_metric)


def _score(preds, labels, metric, positive):
    if metric == "accuracy":
        return accuracy_score(preds, labels)
    return f1_score(preds, labels, positive)


def _select_ensemble_config(ds_train, grid, seed, metric, positive):
    """Inner 5-fold grid search over (n_trees, max_depth); first best wins."""
    plan = stratified_folds(ds_train, 1, 5, seed)
    splits = [(ds_train.subset(tr), ds_train.subset(te))
              for _, _, tr, te in plan.iter_splits()]
    best = None
    for n_trees, depth in grid.ensemble_points():
        scores = []
        for i, (tr, te) in enumerate(splits):
            cfg = TrainConfig(n_trees=n_trees, max_depth=depth,
                              seed=seed * 1000003 + i)
            H = train_forest(tr, cfg)
            preds = predict_ensemble_batch(H, te.features)
            scores.append(_score(preds, te.labels, metric, positive))
        mean = float(np.mean(scores))
        if best is None or mean > best[0]:
            best = (mean, n_trees, depth)
    return best[1], best[2]


def _select_simplifier_config(ds_train, inner_ensembles, inner_splits, grid,
                              mode, support_unit, metric, positive):
    """Inner 3-fold search; the same per-fold ensembles serve every grid
    point and both modes."""
    best = None
    for point in grid.simplifier_points():
        cfg = _simplify_config(point, mode, support_unit, metric)
        scores = []
        for H, (tr, te) in zip(inner_ensembles, inner_splits):
            rs, _ = simplify(H, tr, cfg)
            preds, _ = rs.predict_batch(te.features)
            scores.append(_score(preds, te.labels, metric, positive))
        mean = float(np.mean(scores))
        if best is None or mean > best[0]:
            best = (mean, point)
    return best[1]


def run_cv(ds: Dataset, grid: GridSpec, plan: FoldPlan, modes,
           dataset_name: str = "dataset", seed: int = 0,
           selection_metric: str = "f1", positive_class: int = 1,
           support_unit: str = "count") -> RunReport:
    """Full nested-CV protocol; one report row per (repeat, fold, mode)."""
    modes = list(modes)
    report = RunReport()
    for repeat, fold, train_idx, test_idx in plan.iter_splits():
        fold_seed = seed * 7919 + repeat * 101 + fold
        ds_train = ds.subset(train_idx)
        ds_test = ds.subset(test_idx)

        n_trees, depth = _select_ensemble_config(
            ds_train, grid, fold_seed, selection_metric, positive_class)

        t0 = time.perf_counter()
        final_cfg = TrainConfig(n_trees=n_trees, max_depth=depth, seed=fold_seed)
        H = train_forest(ds_train, final_cfg)
        ensemble_time = time.perf_counter() - t0
        ensemble_rules = n_rules(H)

        # Shared inner ensembles for the simplifier search (3-fold).
        inner_plan = stratified_folds(ds_train, 1, 3, fold_seed + 1)
        inner_splits = [(ds_train.subset(tr), ds_train.subset(te))
                        for _, _, tr, te in inner_plan.iter_splits()]
        inner_ensembles = [
            train_forest(tr, TrainConfig(n_trees=n_trees, max_depth=depth,
                                         seed=fold_seed + 13 + i))
            for i, (tr, _) in enumerate(inner_splits)]

        for mode in modes:
            point = _select_simplifier_config(
                ds_train, inner_ensembles, inner_splits, grid, mode,
                support_unit, selection_metric, positive_class)
            cfg = _simplify_config(point, mode, support_unit, selection_metric)

            t0 = time.perf_counter()
            rs, _ = simplify(H, ds_train, cfg)
            simplify_time = time.perf_counter() - t0

            train_preds, _ = rs.predict_batch(ds_train.features)
            test_preds, _ = rs.predict_batch(ds_test.features)
            final_rules = len(rs.rules) + 1  # default rule included
            if len(H.trees) >= 2 and final_rules > ensemble_rules:
                logger.warning(
                    "%s repeat=%d fold=%d mode=%s: ruleset (%d) not smaller "
                    "than ensemble (%d)", dataset_name, repeat, fold, mode,
                    final_rules, ensemble_rules)
            report.append(
                dataset=dataset_name, repeat=repeat, fold=fold, mode=mode,
                config_hash=config_hash({
                    "ensemble": [n_trees, depth],
                    "simplifier": list(point), "mode": mode}),
                f1_train=f1_score(train_preds, ds_train.labels, positive_class),
                f1_test=f1_score(test_preds, ds_test.labels, positive_class),
                acc_train=accuracy_score(train_preds, ds_train.labels),
                acc_test=accuracy_score(test_preds, ds_test.labels),
                n_rules_final=final_rules,
                n_rules_ensemble=ensemble_rules,
                total_conditions=rs.total_conditions,
                simplify_time_s=simplify_time,
                ensemble_time_s=ensemble_time,
            )
    return report


def speedup_report(report: RunReport):
    """Mean simplify time per mode and the exact/probabilistic ratio,
    per dataset plus an aggregate row."""
    modes = report.modes()
    for needed in ("exact", "probabilistic"):
        if needed not in modes:
            raise MissingModeError(f"report has no rows for mode {needed!r}")
    datasets = sorted({row["dataset"] for row in report.rows})
    out = []
    for name in datasets + ["__aggregate__"]:
        rows = report.rows if name == "__aggregate__" else \
            [r for r in report.rows if r["dataset"] == name]
        mean_exact = float(np.mean(
            [r["simplify_time_s"] for r in rows if r["mode"] == "exact"]))
        mean_prob = float(np.mean(
            [r["simplify_time_s"] for r in rows if r["mode"] == "probabilistic"]))
        out.append({
            "dataset": name,
            "mean_exact_s": mean_exact,
            "mean_probabilistic_s": mean_prob,
            "speedup": mean_exact / mean_prob if mean_prob > 0 else float("inf"),
        })
    return out


def compactness_report(report: RunReport):
    """Rule-count summary per dataset and mode."""
    out = []
    groups = sorted({(r["dataset"], r["mode"]) for r in report.rows})
    for dataset, mode in groups:
        rows = [r for r in report.rows
                if r["dataset"] == dataset and r["mode"] == mode]
        finals = [r["n_rules_final"] for r in rows]
        out.append({
            "dataset": dataset,
            "mode": mode,
            "mean_n_rules_final": float(np.mean(finals)),
            "median_n_rules_final": float(np.median(finals)),
            "mean_n_rules_ensemble": float(np.mean(
                [r["n_rules_ensemble"] for r in rows])),
            "mean_total_conditions": float(np.mean(
                [r["total_conditions"] for r in rows])),
        })
    return out


def write_summary_csv(rows, path) -> None:
    if not rows:
        raise ValueError("no summary rows to write")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
