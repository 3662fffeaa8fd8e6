"""Greedy combination and simplification of tree-ensemble rulesets.

The pipeline initializes with the first tree's rules, then for each further
tree cross-merges the running ruleset with that tree's rules, filters the
candidates by coverage and confidence, prunes them by sequential covering,
generalizes the survivors with a pessimistic error bound, and keeps the
better-scoring ruleset on the training data. A default rule for uncovered
instances is appended at the end.

Rule statistics come from one of two interchangeable evaluation modes:

* ``probabilistic``: coverage from a product of precomputed atom marginals,
  confidence from a support-weighted mix of the Naive-Bayes posterior and a
  prior-shrunk leaf posterior. No dataset access inside the merge and
  generalization loops.
* ``exact``: every statistic recounted from per-atom coverage bitsets. This
  is the correctness oracle and the runtime baseline.

Sequential covering counts exactly in both modes, and exact coverage and
class counts are recomputed for the rules that survive generalization.
"""

import json
import logging
import math
import time
from dataclasses import dataclass, field
from statistics import NormalDist

import numpy as np

from .conditions import GT, LE, Condition
from .dataset import CoverageBitset, Dataset, bits_to_mask, condition_bits, mask_to_bits
from .ensemble import Ensemble, n_rules
from .metrics import accuracy_score, f1_score
from .probability import (
    ProbTables,
    fit_tables,
    merge_evidence,
)
from .rules import Rule, RuleSet, empirical_stats, extract_rules, merge_canonical

logger = logging.getLogger(__name__)

MODES = ("probabilistic", "exact")
SUPPORT_UNITS = ("count", "fraction")
SELECTION_METRICS = ("f1", "accuracy")


def z_from_confidence(c: float) -> float:
    """Two-sided standard-normal quantile at c/2, rounded to two decimals
    (c=25% gives the conventional 1.15)."""
    if not 0.0 < c < 1.0:
        raise ValueError("confidence level c must be in (0, 1)")
    return round(NormalDist().inv_cdf(1.0 - c / 2.0), 2)


def e_upper(n: float, e: float, z: float) -> float:
    """Upper bound of the normal approximation to a binomial error rate."""
    z2 = z * z
    num = e + z2 / (2.0 * n) + z * math.sqrt(e * (1.0 - e) / n + z2 / (4.0 * n * n))
    return num / (1.0 + z2 / n)


@dataclass(frozen=True)
class SimplifyConfig:
    """All simplification hyperparameters plus the evaluation-mode switch."""

    eps_conf: float = 0.5
    eps_cov: float = 0.0
    conf_level_c: float = 0.25
    eta: float = 1.0
    tau: float = 20.0
    n0: float = 50.0
    mode: str = "probabilistic"
    support_unit: str = "count"
    selection_metric: str = "f1"
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.eps_conf <= 1.0:
            raise ValueError("eps_conf must be in [0, 1]")
        if not 0.0 <= self.eps_cov <= 1.0:
            raise ValueError("eps_cov must be in [0, 1]")
        if not 0.0 < self.conf_level_c < 1.0:
            raise ValueError("conf_level_c must be in (0, 1)")
        if self.eta <= 0:
            raise ValueError("eta must be > 0")
        if self.tau < 0:
            raise ValueError("tau must be >= 0")
        if self.n0 <= 0:
            raise ValueError("n0 must be > 0")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.support_unit not in SUPPORT_UNITS:
            raise ValueError(f"support_unit must be one of {SUPPORT_UNITS}")
        if self.selection_metric not in SELECTION_METRICS:
            raise ValueError(f"selection_metric must be one of {SELECTION_METRICS}")

    @property
    def z(self) -> float:
        return z_from_confidence(self.conf_level_c)

    def to_json(self) -> dict:
        return {
            "eps_conf": self.eps_conf, "eps_cov": self.eps_cov,
            "conf_level_c": self.conf_level_c, "eta": self.eta,
            "tau": self.tau, "n0": self.n0, "mode": self.mode,
            "support_unit": self.support_unit,
            "selection_metric": self.selection_metric, "seed": self.seed,
        }


class Counters:
    """Instrumentation totals; exact mode must keep the first two at zero."""

    __slots__ = ("nb_posterior_evals", "approx_coverage_evals",
                 "exact_coverage_evals", "evidence_identity_merges",
                 "evidence_recomputed_merges")

    def __init__(self):
        self.nb_posterior_evals = 0
        self.approx_coverage_evals = 0
        self.exact_coverage_evals = 0
        self.evidence_identity_merges = 0
        self.evidence_recomputed_merges = 0

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in self.__slots__}


@dataclass
class IterationRecord:
    k: int
    candidates_generated: int
    candidates_rejected_early: int
    rules_after_pruning: int
    rules_after_generalization: int
    training_metric: float
    kept_new: bool
    timings_ns: dict

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "candidates_generated": self.candidates_generated,
            "candidates_rejected_early": self.candidates_rejected_early,
            "rules_after_pruning": self.rules_after_pruning,
            "rules_after_generalization": self.rules_after_generalization,
            "training_metric": self.training_metric,
            "kept_new": self.kept_new,
            "timings_ns": self.timings_ns,
        }


@dataclass
class SimplifyTrace:
    mode: str
    iterations: list = field(default_factory=list)
    counters: Counters = field(default_factory=Counters)
    total_ns: int = 0

    def to_jsonl(self) -> str:
        return "\n".join(json.dumps(rec.to_json(), sort_keys=True)
                         for rec in self.iterations)


class _Context:
    """Shared per-run state handed to the pipeline stages.

    ds may be None for purely probabilistic use (public generalize); exact
    statistics then raise naturally on the missing bitsets.
    """

    __slots__ = ("ds", "cfg", "tables", "atom_bits", "counters", "full_bits",
                 "y1_bits", "N")

    def __init__(self, ds, cfg, tables, atom_bits, counters):
        self.ds = ds
        self.cfg = cfg
        self.tables = tables
        self.atom_bits = atom_bits
        self.counters = counters
        if ds is not None:
            self.full_bits = ds.full_bits()
            self.y1_bits = ds.label_bits(1)
            self.N = ds.N
        else:
            self.full_bits = None
            self.y1_bits = None
            self.N = tables.N


def build_atom_bitsets(ds: Dataset, conditions) -> dict:
    """Coverage bitset per condition; GT bits are the complement of LE bits.

    Thresholds are grouped per feature so the column is sorted once and the
    nested LE masks grow incrementally instead of re-scanning the column.
    """
    bits = {}
    full = ds.full_bits()
    by_feature = {}
    for cond in conditions:
        by_feature.setdefault(cond.feature, set()).add(cond.threshold)
    for f, thresholds in by_feature.items():
        col = ds.features[:, f]
        order = np.argsort(col, kind="stable")
        sorted_col = col[order]
        ts = sorted(thresholds)
        positions = np.searchsorted(sorted_col, ts, side="right")
        mask = np.zeros(ds.N, dtype=bool)
        j = 0
        for t, p in zip(ts, positions):
            if p > j:
                mask[order[j:p]] = True
                j = p
            le_bits = mask_to_bits(mask)
            bits[Condition(f, LE, t)] = le_bits
            bits[Condition(f, GT, t)] = full ^ le_bits
    return bits


def _exact_bits(ctx: _Context, antecedent) -> int:
    bits = ctx.full_bits
    atom_bits = ctx.atom_bits
    for cond in antecedent:
        bits &= atom_bits[cond]
    ctx.counters.exact_coverage_evals += 1
    return bits


def _attach_exact_stats(ctx: _Context, rule: Rule) -> None:
    """Fill in exact coverage, class counts, and confidence, reusing a still
    valid cached bitset when the antecedent has not changed since."""
    if rule.cov_exact is not None:
        bits = rule.cov_exact.bits
        count = rule.cov_exact.count
    else:
        bits = _exact_bits(ctx, rule.antecedent)
        count = bits.bit_count()
        rule.cov_exact = CoverageBitset(bits, ctx.N, count)
    n1 = (bits & ctx.y1_bits).bit_count()
    counts = (count - n1, n1)
    rule.class_counts = counts
    rule.conf = counts[rule.head_class] / count if count else 0.0


def _recount(ctx: _Context, rules) -> None:
    """Post-generalization recount: exact coverage and class counts for every
    surviving rule; in probabilistic mode the head is then re-mixed with the
    exact counts behind the leaf posterior and the exact count as support."""
    probabilistic = ctx.cfg.mode == "probabilistic"
    count_unit = ctx.cfg.support_unit == "count"
    for rule in rules:
        _attach_exact_stats(ctx, rule)
        if not probabilistic:
            continue
        count = rule.cov_exact.count
        support = count if count_unit else count / ctx.N
        head = _mix(_nb_from_evidence(ctx, rule.evidence),
                    _leaf_mix(ctx, rule.class_counts), support, ctx.cfg.n0)
        rule.head = head
        if count:
            rule.conf = rule.class_counts[rule.head_class] / count
        else:
            rule.conf = 0.0


def _prob_rule_state(tables: ProbTables, rule: Rule) -> None:
    """Seed a freshly extracted rule with its evidence and log-marginal sums."""
    e0 = e1 = lm = 0.0
    atoms = tables.atoms
    for cond in rule.antecedent:
        s = atoms[cond]
        e0 += s.ll0
        e1 += s.ll1
        lm += s.lm
    rule.evidence = (e0, e1)
    rule.log_cov = lm


def _leaf_mix(ctx: _Context, counts):
    """Leaf posterior with the tau=0, zero-count limit defined as the prior."""
    tau = ctx.cfg.tau
    n0c, n1c = counts
    total = n0c + n1c + tau
    prior = ctx.tables.prior
    if total == 0:
        return prior
    return ((n0c + tau * prior[0]) / total, (n1c + tau * prior[1]) / total)


def _nb_from_evidence(ctx: _Context, evidence):
    ctx.counters.nb_posterior_evals += 1
    lp = ctx.tables.log_prior
    v0 = lp[0] + evidence[0]
    v1 = lp[1] + evidence[1]
    mx = v0 if v0 > v1 else v1
    z0 = math.exp(v0 - mx)
    z1 = math.exp(v1 - mx)
    tot = z0 + z1
    return (z0 / tot, z1 / tot)


def _mix(p_nb, p_leaf, support, n0):
    lam = support / (support + n0)
    inv = 1.0 - lam
    return (lam * p_nb[0] + inv * p_leaf[0], lam * p_nb[1] + inv * p_leaf[1])


def generate_candidates(rstar, rk, ctx: _Context):
    """Cross-merge two rule lists into filtered, deduplicated candidates.

    Contradictory merges are skipped. In probabilistic mode a candidate is
    rejected early, before any bitset work, when the estimated coverage or
    the estimated hybrid confidence misses its threshold; survivors then get
    exact coverage computed and must clear coverage > eps_cov and
    confidence >= eps_conf with their exact class counts backing the leaf
    posterior. Exact mode computes exact statistics for every pair.
    Duplicated antecedents keep the first accepted copy (equal antecedents
    yield equal final confidence).
    """
    cfg = ctx.cfg
    probabilistic = cfg.mode == "probabilistic"
    count_unit = cfg.support_unit == "count"
    eps_cov, eps_conf, n0 = cfg.eps_cov, cfg.eps_conf, cfg.n0
    tables = ctx.tables
    pool = {}
    generated = rejected = 0
    for ri in rstar:
        a1 = ri.antecedent
        for rj in rk:
            generated += 1
            merged, tightened, shared = merge_canonical(a1, rj.antecedent)
            if merged is None:
                rejected += 1
                continue
            if merged in pool:
                continue
            if probabilistic:
                if tightened:
                    ctx.counters.evidence_recomputed_merges += 1
                    e0 = e1 = lm = 0.0
                    atoms = tables.atoms
                    for cond in merged:
                        s = atoms[cond]
                        e0 += s.ll0
                        e1 += s.ll1
                        lm += s.lm
                    evidence = (e0, e1)
                else:
                    ctx.counters.evidence_identity_merges += 1
                    se0 = se1 = slm = 0.0
                    atoms = tables.atoms
                    for cond in shared:
                        s = atoms[cond]
                        se0 += s.ll0
                        se1 += s.ll1
                        slm += s.lm
                    evidence = merge_evidence(ri.evidence, rj.evidence, (se0, se1))
                    lm = ri.log_cov + rj.log_cov - slm
                ctx.counters.approx_coverage_evals += 1
                p_hat = math.exp(lm)
                if p_hat <= eps_cov:
                    rejected += 1
                    continue
                p_nb = _nb_from_evidence(ctx, evidence)
                est_counts = (min(ri.class_counts[0], rj.class_counts[0]),
                              min(ri.class_counts[1], rj.class_counts[1]))
                support_est = ctx.N * p_hat if count_unit else p_hat
                early = _mix(p_nb, _leaf_mix(ctx, est_counts), support_est, n0)
                if (early[0] if early[0] >= early[1] else early[1]) < eps_conf:
                    rejected += 1
                    continue
                # estimates cleared the bar: confirm against exact counts
                bits = _exact_bits(ctx, merged)
                count = bits.bit_count()
                if count == 0 or count / ctx.N <= eps_cov:
                    rejected += 1
                    continue
                n1 = (bits & ctx.y1_bits).bit_count()
                counts = (count - n1, n1)
                support = count if count_unit else count / ctx.N
                head = _mix(p_nb, _leaf_mix(ctx, counts), support, n0)
                conf = head[0] if head[0] >= head[1] else head[1]
                if conf < eps_conf:
                    rejected += 1
                    continue
                rule = Rule(merged, head, class_counts=counts,
                            evidence=evidence, log_cov=lm,
                            cov_exact=CoverageBitset(bits, ctx.N, count),
                            conf=conf)
            else:
                bits = _exact_bits(ctx, merged)
                count = bits.bit_count()
                if count / ctx.N <= eps_cov or count == 0:
                    rejected += 1
                    continue
                n1 = (bits & ctx.y1_bits).bit_count()
                head = ((count - n1) / count, n1 / count)
                conf = head[0] if head[0] >= head[1] else head[1]
                if conf < eps_conf:
                    rejected += 1
                    continue
                rule = Rule(merged, head, class_counts=(count - n1, n1),
                            cov_exact=CoverageBitset(bits, ctx.N, count),
                            conf=conf)
            pool[merged] = rule
    return list(pool.values()), generated, rejected


def sequential_covering_prune(candidates, ds: Dataset, cfg: SimplifyConfig,
                              atom_bits=None, counters=None):
    """Greedy covering selection with exact counting regardless of mode.

    Repeatedly picks the candidate with the best (confidence, coverage,
    fewer conditions, canonical antecedent) on the not-yet-covered training
    instances, then removes what it covers. Unselected candidates are
    discarded.
    """
    remaining = ds.full_bits()
    y_bits = (ds.label_bits(0), ds.label_bits(1))
    pool = []
    for rule in candidates:
        if rule.cov_exact is None:
            bits = ds.full_bits()
            for cond in rule.antecedent:
                bits &= atom_bits[cond] if atom_bits is not None \
                    else condition_bits(ds, cond)
            if counters is not None:
                counters.exact_coverage_evals += 1
            rule.cov_exact = CoverageBitset(bits, ds.N)
        pool.append((rule, rule.cov_exact.bits, y_bits[rule.head_class]))

    selected = []
    while remaining and pool:
        best = None
        best_key = None
        surviving = []
        for entry in pool:
            rule, bits, head_bits = entry
            rb = bits & remaining
            count = rb.bit_count()
            if count == 0:
                continue  # permanently out: remaining only shrinks
            surviving.append(entry)
            conf = (rb & head_bits).bit_count() / count
            key = (conf, count, -rule.n_conditions)
            if best is None or key > best_key or \
                    (key == best_key and rule.antecedent < best[0].antecedent):
                best = entry
                best_key = key
        if best is None:
            break
        surviving.remove(best)
        pool = surviving
        selected.append(best[0])
        remaining &= ~best[1]
    return selected


def _generalize_prob(rule: Rule, ctx: _Context):
    cfg = ctx.cfg
    z = cfg.z
    count_unit = cfg.support_unit == "count"
    antecedent = list(rule.antecedent)
    evidence = rule.evidence
    lm = rule.log_cov
    p_leaf = _leaf_mix(ctx, rule.class_counts)
    atoms = ctx.tables.atoms
    changed = False

    def score(ev, log_cov):
        p_nb = _nb_from_evidence(ctx, ev)
        ctx.counters.approx_coverage_evals += 1
        p_hat = math.exp(log_cov)
        n_hat = ctx.N * p_hat
        head = _mix(p_nb, p_leaf, n_hat if count_unit else p_hat, cfg.n0)
        n_r = n_hat if n_hat > 1.0 else 1.0
        e_r = 1.0 - (head[0] if head[0] >= head[1] else head[1])
        return e_upper(n_r, e_r, z), head

    current, head = score(evidence, lm)
    while len(antecedent) > 1:
        best_i = -1
        best_score = None
        for i, cond in enumerate(antecedent):
            s = atoms[cond]
            trial_ev = (evidence[0] - s.ll0, evidence[1] - s.ll1)
            trial_lm = lm - s.lm
            trial_score, _ = score(trial_ev, trial_lm)
            if best_score is None or trial_score <= best_score:
                best_score = trial_score  # <= keeps the canonically last tie
                best_i = i
        if best_score > current:
            break
        cond = antecedent.pop(best_i)
        s = atoms[cond]
        evidence = (evidence[0] - s.ll0, evidence[1] - s.ll1)
        lm -= s.lm
        current, head = score(evidence, lm)
        changed = True

    if changed:
        rule.antecedent = tuple(antecedent)
        rule.evidence = evidence
        rule.log_cov = lm
        rule.cov_exact = None  # stale; recount recomputes it
    rule.head = head
    rule.conf = head[0] if head[0] >= head[1] else head[1]
    return rule


def _generalize_exact(rule: Rule, ctx: _Context):
    z = ctx.cfg.z
    antecedent = list(rule.antecedent)
    bits = rule.cov_exact.bits

    def stats(b):
        count = b.bit_count()
        if count == 0:
            return 1.0, 0.5, (0, 0), (0.5, 0.5)
        n1 = (b & ctx.y1_bits).bit_count()
        head = ((count - n1) / count, n1 / count)
        conf = head[0] if head[0] >= head[1] else head[1]
        return float(count), 1.0 - conf, (count - n1, n1), head

    n_r, e_r, counts, head = stats(bits)
    current = e_upper(n_r, e_r, z)
    while len(antecedent) > 1:
        best_i = -1
        best_score = None
        best_bits = None
        for i in range(len(antecedent)):
            tb = ctx.full_bits
            for j, cond in enumerate(antecedent):
                if j != i:
                    tb &= ctx.atom_bits[cond]
            ctx.counters.exact_coverage_evals += 1
            t_n, t_e, _, _ = stats(tb)
            t_score = e_upper(t_n, t_e, z)
            if best_score is None or t_score <= best_score:
                best_score = t_score
                best_i = i
                best_bits = tb
        if best_score > current:
            break
        antecedent.pop(best_i)
        bits = best_bits
        n_r, e_r, counts, head = stats(bits)
        current = e_upper(n_r, e_r, z)

    rule.antecedent = tuple(antecedent)
    rule.cov_exact = CoverageBitset(bits, ctx.N)
    rule.class_counts = counts
    rule.head = head
    rule.conf = head[0] if head[0] >= head[1] else head[1]
    return rule


def generalize(rules, tables, cfg: SimplifyConfig, ds=None, atom_bits=None,
               counters=None):
    """Iteratively drop single conditions while the pessimistic error bound
    does not worsen; rules never generalize below one condition."""
    ctx = _Context(ds, cfg, tables, atom_bits, counters or Counters())
    out = []
    for rule in rules:
        if cfg.mode == "probabilistic":
            out.append(_generalize_prob(rule, ctx))
        else:
            out.append(_generalize_exact(rule, ctx))
    return out


def default_rule(rs: RuleSet, ds: Dataset) -> RuleSet:
    """Set the default class to the majority label of uncovered instances
    (dataset majority when everything is covered; ties to class 0)."""
    covered = 0
    for rule in rs.rules:
        if rule.cov_exact is None:
            empirical_stats(rule, ds)
        covered |= rule.cov_exact.bits
    uncovered = ds.full_bits() & ~covered
    if uncovered:
        n1 = (uncovered & ds.label_bits(1)).bit_count()
        n0 = uncovered.bit_count() - n1
    else:
        n0, n1 = ds.class_counts()
    return RuleSet(rs.rules, 1 if n1 > n0 else 0, rs.class_names)


def _training_metric(rules, ds: Dataset, metric_name: str) -> float:
    """Exact training metric of a rule list with a provisional default class
    (majority label of the uncovered instances)."""
    n = ds.N
    diff = np.zeros(n)
    covered_bits = 0
    for rule in rules:
        bits = rule.cov_exact.bits
        if not bits:
            continue
        covered_bits |= bits
        mask = bits_to_mask(bits, n)
        diff[mask] += rule.head[1] - rule.head[0]
    preds = (diff > 0).astype(np.int64)
    if covered_bits != ds.full_bits():
        unc = ~bits_to_mask(covered_bits, n)
        n1 = int(ds.labels[unc].sum())
        preds[unc] = 1 if n1 > int(np.count_nonzero(unc)) - n1 else 0
    if metric_name == "accuracy":
        return accuracy_score(preds, ds.labels)
    return f1_score(preds, ds.labels, 1)


def _better(metric_new, rules_new, metric_old, rules_old) -> bool:
    """New ruleset wins on metric, then fewer rules, then fewer conditions;
    full ties keep the old one."""
    if metric_new != metric_old:
        return metric_new > metric_old
    if len(rules_new) != len(rules_old):
        return len(rules_new) < len(rules_old)
    new_conds = sum(r.n_conditions for r in rules_new)
    old_conds = sum(r.n_conditions for r in rules_old)
    return new_conds < old_conds


def simplify(H: Ensemble, ds: Dataset, cfg: SimplifyConfig):
    """Run the full combine-prune-generalize loop over an ensemble.

    Returns the simplified RuleSet (default rule included) and the trace of
    per-iteration statistics, stage timings, and instrumentation counters.
    """
    t_start = time.perf_counter_ns()
    trace = SimplifyTrace(mode=cfg.mode)
    counters = trace.counters

    t0 = time.perf_counter_ns()
    per_tree = [extract_rules(tree) for tree in H.trees]
    all_conditions = {c for rules in per_tree for r in rules for c in r.antecedent}
    atom_bits = build_atom_bitsets(ds, all_conditions)
    tables = None
    if cfg.mode == "probabilistic":
        tables = fit_tables(ds, all_conditions, cfg.eta, atom_bits)
        for rules in per_tree:
            for rule in rules:
                _prob_rule_state(tables, rule)
    ctx = _Context(ds, cfg, tables, atom_bits, counters)
    setup_ns = time.perf_counter_ns() - t0

    if len(per_tree) == 1:
        # Single tree: prune and generalize its own rules, no combination.
        t0 = time.perf_counter_ns()
        for rule in per_tree[0]:
            _attach_exact_stats(ctx, rule)
        pruned = sequential_covering_prune(per_tree[0], ds, cfg, atom_bits, counters)
        prune_ns = time.perf_counter_ns() - t0
        t0 = time.perf_counter_ns()
        rstar = generalize(pruned, tables, cfg, ds=ds, atom_bits=atom_bits,
                           counters=counters)
        gen_ns = time.perf_counter_ns() - t0
        t0 = time.perf_counter_ns()
        _recount(ctx, rstar)
        metric = _training_metric(rstar, ds, cfg.selection_metric)
        rest_ns = time.perf_counter_ns() - t0
        trace.iterations.append(IterationRecord(
            1, 0, 0, len(pruned), len(rstar), metric, True,
            {"setup": setup_ns, "merge": 0, "prune": prune_ns,
             "generalize": gen_ns, "recount": rest_ns}))
    else:
        t0 = time.perf_counter_ns()
        rstar = per_tree[0]
        for rule in rstar:
            _attach_exact_stats(ctx, rule)
        metric = _training_metric(rstar, ds, cfg.selection_metric)
        init_ns = time.perf_counter_ns() - t0
        trace.iterations.append(IterationRecord(
            1, 0, 0, len(rstar), len(rstar), metric, True,
            {"setup": setup_ns, "merge": 0, "prune": 0, "generalize": 0,
             "recount": init_ns}))

        for k in range(1, len(per_tree)):
            t0 = time.perf_counter_ns()
            candidates, generated, rejected = generate_candidates(
                rstar, per_tree[k], ctx)
            merge_ns = time.perf_counter_ns() - t0

            t0 = time.perf_counter_ns()
            pruned = sequential_covering_prune(candidates, ds, cfg, atom_bits,
                                               counters)
            prune_ns = time.perf_counter_ns() - t0

            t0 = time.perf_counter_ns()
            new_rules = generalize(pruned, tables, cfg, ds=ds,
                                   atom_bits=atom_bits, counters=counters)
            gen_ns = time.perf_counter_ns() - t0

            t0 = time.perf_counter_ns()
            _recount(ctx, new_rules)
            recount_ns = time.perf_counter_ns() - t0

            t0 = time.perf_counter_ns()
            metric_new = _training_metric(new_rules, ds, cfg.selection_metric)
            kept = _better(metric_new, new_rules, metric, rstar)
            if kept:
                rstar = new_rules
                metric = metric_new
            eval_ns = time.perf_counter_ns() - t0
            trace.iterations.append(IterationRecord(
                k + 1, generated, rejected, len(pruned), len(new_rules),
                metric, kept,
                {"setup": 0, "merge": merge_ns, "prune": prune_ns,
                 "generalize": gen_ns, "recount": recount_ns,
                 "evaluate": eval_ns}))
            if metric == 1.0:
                break

    result = default_rule(RuleSet(rstar, 0, ds.class_names), ds)
    trace.total_ns = time.perf_counter_ns() - t_start

    total_ensemble_rules = n_rules(H)
    if len(H.trees) >= 2 and total_ensemble_rules > 2 and \
            len(result.rules) >= total_ensemble_rules:
        logger.warning(
            "simplified ruleset (%d rules) is not smaller than the ensemble "
            "(%d rules)", len(result.rules), total_ensemble_rules)
    return result, trace
