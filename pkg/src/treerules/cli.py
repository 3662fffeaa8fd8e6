"""Command-line interface: train, extract, simplify, cv, report."""

import argparse
import json
import sys
from pathlib import Path

from . import bench
from .dataset import load_csv, stratified_folds
from .ensemble import (
    TrainConfig,
    export_json_file,
    import_json,
    n_rules,
    train_cart,
    train_forest,
)
from .probability import fit_tables
from .rules import RuleSet, empirical_stats, extract_rules
from .simplify import SimplifyConfig, default_rule, simplify


def _add_data_args(p):
    p.add_argument("--data", required=True, help="CSV file (header row required)")
    p.add_argument("--label", default=None,
                   help="label column name (default: last column)")


def _load(args):
    return load_csv(args.data, args.label)


def _write_ruleset(rs, out, feature_names):
    if out is None:
        print(rs.to_text(feature_names))
    elif str(out).endswith(".json"):
        Path(out).write_text(rs.to_json_str() + "\n", encoding="utf-8")
    else:
        Path(out).write_text(rs.to_text(feature_names) + "\n", encoding="utf-8")


def _cmd_train(args):
    ds = _load(args)
    cfg = TrainConfig(n_trees=args.n_trees, max_depth=args.depth,
                      bootstrap=not args.no_bootstrap,
                      feature_subsample=args.feature_subsample,
                      min_leaf=args.min_leaf, seed=args.seed)
    if cfg.n_trees == 1 and not cfg.bootstrap:
        H = train_cart(ds, cfg)
    else:
        H = train_forest(ds, cfg)
    export_json_file(H, args.out)
    print(f"trained {len(H.trees)} tree(s), {n_rules(H)} leaf rules -> {args.out}")


def _cmd_extract(args):
    ds = _load(args)
    H = import_json(args.model, ds)
    rules = [r for tree in H.trees for r in extract_rules(tree)]
    for rule in rules:
        empirical_stats(rule, ds)
    rs = default_rule(RuleSet(rules, 0, ds.class_names), ds)
    _write_ruleset(rs, args.out, ds.feature_names)
    if args.out:
        print(f"extracted {len(rules)} rules -> {args.out}")


def _cmd_simplify(args):
    ds = _load(args)
    H = import_json(args.model, ds)
    cfg = SimplifyConfig(
        eps_conf=args.eps_conf, eps_cov=args.eps_cov, conf_level_c=args.c,
        eta=args.eta, tau=args.tau, n0=args.n0, mode=args.mode,
        support_unit=args.support_unit, selection_metric=args.selection_metric,
        seed=args.seed)
    rs, trace = simplify(H, ds, cfg)
    if args.trace:
        Path(args.trace).write_text(trace.to_jsonl() + "\n", encoding="utf-8")
    if args.dump_tables:
        atoms = {c for tree in H.trees for r in extract_rules(tree)
                 for c in r.antecedent}
        tables = fit_tables(ds, atoms, cfg.eta)
        Path(args.dump_tables).write_text(
            json.dumps(tables.to_json(), indent=2) + "\n", encoding="utf-8")
    _write_ruleset(rs, args.out, ds.feature_names)
    print(f"{len(rs.rules)} rules (+default) from {n_rules(H)} ensemble rules, "
          f"mode={cfg.mode}, {trace.total_ns / 1e9:.3f}s",
          file=sys.stderr)


def _cmd_cv(args):
    ds = _load(args)
    if args.grid:
        grid = bench.GridSpec.from_json(args.grid)
    elif args.full_grid:
        grid = bench.GridSpec.full()
    else:
        grid = bench.GridSpec()
    plan = stratified_folds(ds, args.repeats, args.folds, args.seed)
    modes = ["probabilistic", "exact"] if args.modes == "both" else [args.modes]
    name = args.name or Path(args.data).stem
    report = bench.run_cv(ds, grid, plan, modes, dataset_name=name,
                          seed=args.seed, selection_metric=args.metric,
                          positive_class=args.positive)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report.to_csv(out / "report.csv")
    bench.write_summary_csv(bench.compactness_report(report),
                            out / "compactness.csv")
    if len(modes) == 2:
        bench.write_summary_csv(bench.speedup_report(report),
                                out / "speedup.csv")
    print(f"{len(report.rows)} rows -> {out / 'report.csv'}")


def _cmd_report(args):
    report = bench.RunReport.from_csv(args.report)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    bench.write_summary_csv(bench.compactness_report(report),
                            out / "compactness.csv")
    written = ["compactness.csv"]
    if {"probabilistic", "exact"} <= set(report.modes()):
        bench.write_summary_csv(bench.speedup_report(report),
                                out / "speedup.csv")
        written.append("speedup.csv")
    print(f"wrote {', '.join(written)} in {out}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treerules",
        description="Compress tree ensembles into compact IF-THEN rulesets.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train an ensemble and export it as JSON")
    _add_data_args(p)
    p.add_argument("--n-trees", type=int, default=100)
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--no-bootstrap", action="store_true")
    p.add_argument("--feature-subsample", type=float, default=1.0)
    p.add_argument("--min-leaf", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output ensemble JSON path")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("extract", help="dump every root-to-leaf rule")
    _add_data_args(p)
    p.add_argument("--model", required=True, help="ensemble JSON path")
    p.add_argument("--out", default=None,
                   help="ruleset output (.json for JSON, else text; stdout if omitted)")
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("simplify", help="simplify an ensemble into a ruleset")
    _add_data_args(p)
    p.add_argument("--model", required=True, help="ensemble JSON path")
    p.add_argument("--mode", choices=["probabilistic", "exact"],
                   default="probabilistic")
    p.add_argument("--eps-conf", type=float, default=0.5)
    p.add_argument("--eps-cov", type=float, default=0.0)
    p.add_argument("--c", type=float, default=0.25, help="pessimistic confidence level")
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--tau", type=float, default=20.0)
    p.add_argument("--n0", type=float, default=50.0)
    p.add_argument("--support-unit", choices=["count", "fraction"], default="count")
    p.add_argument("--selection-metric", choices=["f1", "accuracy"], default="f1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None,
                   help="ruleset output (.json for JSON, else text; stdout if omitted)")
    p.add_argument("--trace", default=None, help="write per-iteration JSONL trace")
    p.add_argument("--dump-tables", default=None,
                   help="write the fitted probability tables as JSON")
    p.set_defaults(func=_cmd_simplify)

    p = sub.add_parser("cv", help="repeated stratified CV with nested grid search")
    _add_data_args(p)
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--grid", default=None, help="grid JSON file")
    p.add_argument("--full-grid", action="store_true",
                   help="use the full published search space")
    p.add_argument("--modes", choices=["both", "probabilistic", "exact"],
                   default="both")
    p.add_argument("--metric", choices=["f1", "accuracy"], default="f1")
    p.add_argument("--positive", type=int, choices=[0, 1], default=1,
                   help="positive class index for F1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--name", default=None, help="dataset name for report rows")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_cv)

    p = sub.add_parser("report", help="summarize a CV report CSV")
    p.add_argument("--report", required=True, help="report.csv from the cv command")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    args.func(args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
