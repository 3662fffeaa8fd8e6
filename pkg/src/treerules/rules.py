"""Rules and rulesets: conjunctions of threshold conditions with class heads.

Antecedents are kept canonical at all times: sorted by (feature, op,
threshold), at most one LE and one GT bound per feature (the tightest ones),
and a non-empty interval per feature. Canonical identity is what rule
deduplication, merging, and the evidence-reuse fast path rely on.
"""

import json
import math

import numpy as np

from .conditions import GT, LE, Condition
from .dataset import CoverageBitset, Dataset, condition_bits
from .errors import DimensionMismatchError

UNIFORM_HEAD = (0.5, 0.5)


class Rule:
    """One IF-THEN rule: canonical antecedent plus a class-probability head.

    The remaining fields are evaluation state filled in lazily: leaf or
    empirical class counts, the class-wise log-likelihood evidence vector,
    the log of the estimated coverage probability, the exact coverage bitset,
    and the last computed confidence.
    """

    __slots__ = ("antecedent", "head", "class_counts", "evidence", "log_cov",
                 "cov_exact", "conf")

    def __init__(self, antecedent, head, class_counts=None, evidence=None,
                 log_cov=None, cov_exact=None, conf=None):
        self.antecedent = tuple(antecedent)
        self.head = (float(head[0]), float(head[1]))
        self.class_counts = class_counts
        self.evidence = evidence
        self.log_cov = log_cov
        self.cov_exact = cov_exact
        self.conf = conf

    @property
    def head_class(self) -> int:
        return 0 if self.head[0] >= self.head[1] else 1

    @property
    def n_conditions(self) -> int:
        return len(self.antecedent)

    @property
    def cov_est(self):
        return None if self.log_cov is None else math.exp(self.log_cov)

    def fires(self, x) -> bool:
        for c in self.antecedent:
            if not c.test(x[c.feature]):
                return False
        return True

    def describe(self, feature_names=None) -> str:
        if not self.antecedent:
            return "TRUE"
        return " AND ".join(c.describe(feature_names) for c in self.antecedent)

    def __repr__(self):
        return f"Rule({self.describe()} -> {self.head})"


def canonicalize(conditions):
    """Reduce arbitrary conditions to the canonical antecedent tuple.

    Keeps the tightest LE (minimum threshold) and tightest GT (maximum) per
    feature. Returns None when some feature's interval is empty.
    """
    bounds = {}
    for c in conditions:
        le, gt = bounds.get(c.feature, (None, None))
        if c.op == LE:
            le = c.threshold if le is None else min(le, c.threshold)
        else:
            gt = c.threshold if gt is None else max(gt, c.threshold)
        bounds[c.feature] = (le, gt)
    out = []
    for f in sorted(bounds):
        le, gt = bounds[f]
        if le is not None and gt is not None and gt >= le:
            return None
        if le is not None:
            out.append(Condition(f, LE, le))
        if gt is not None:
            out.append(Condition(f, GT, gt))
    return tuple(out)


def merge_canonical(a, b):
    """Merge two canonical antecedents in one linear pass.

    Returns (merged, tightened, shared): the canonical union, whether any
    per-feature tightening dropped an atom of the plain set union (which
    invalidates the additive evidence identity), and the list of atoms
    present identically in both inputs.
    """
    out = []
    shared = []
    tightened = False
    i = j = 0
    la, lb = len(a), len(b)
    while i < la and j < lb:
        ca, cb = a[i], b[j]
        ka = (ca[0], ca[1])
        kb = (cb[0], cb[1])
        if ka == kb:
            if ca[2] == cb[2]:
                shared.append(ca)
                out.append(ca)
            else:
                tightened = True
                if ca[1] == LE:
                    out.append(ca if ca[2] < cb[2] else cb)
                else:
                    out.append(ca if ca[2] > cb[2] else cb)
            i += 1
            j += 1
        elif ka < kb:
            out.append(ca)
            i += 1
        else:
            out.append(cb)
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    # Empty-interval check: canonical order puts a feature's LE right before
    # its GT, so one adjacent-pair scan suffices.
    for k in range(len(out) - 1):
        c0, c1 = out[k], out[k + 1]
        if c0[0] == c1[0] and c1[2] >= c0[2]:
            return None, tightened, shared
    return tuple(out), tightened, shared


def merge_antecedents(r1: Rule, r2: Rule):
    """Merge two rules' condition sets; None signals an empty intersection.

    The merged rule carries a provisional uniform head (scoring assigns the
    real one) and the elementwise minimum of the parents' class counts, which
    upper-bounds the counts of the intersected region.
    """
    merged, _, _ = merge_canonical(r1.antecedent, r2.antecedent)
    if merged is None:
        return None
    counts = None
    if r1.class_counts is not None and r2.class_counts is not None:
        counts = (min(r1.class_counts[0], r2.class_counts[0]),
                  min(r1.class_counts[1], r2.class_counts[1]))
    elif r1.class_counts is not None:
        counts = r1.class_counts
    elif r2.class_counts is not None:
        counts = r2.class_counts
    return Rule(merged, UNIFORM_HEAD, class_counts=counts)


def extract_rules(tree) -> list:
    """Turn every root-to-leaf path of a tree into a rule.

    Heads are the leaf class counts normalized (uniform when the leaf is
    empty). Paths whose canonical antecedent is contradictory, which only
    inconsistent imported trees can produce, are dropped.
    """
    rules = []
    stack = [(tree, [])]
    while stack:
        node, path = stack.pop()
        if node.is_leaf():
            antecedent = canonicalize(path)
            if antecedent is None:
                continue
            n0, n1 = node.class_counts
            total = n0 + n1
            head = (n0 / total, n1 / total) if total > 0 else UNIFORM_HEAD
            rules.append(Rule(antecedent, head, class_counts=(int(n0), int(n1))))
        else:
            # push right first so the left branch pops first (left-to-right leaves)
            stack.append((node.right, path + [Condition(node.feature, GT, node.threshold)]))
            stack.append((node.left, path + [Condition(node.feature, LE, node.threshold)]))
    return rules


def empirical_stats(rule: Rule, ds: Dataset, atom_bits=None):
    """Exact coverage/confidence/class counts of a rule over a dataset.

    Coverage is the AND of per-condition bitsets; confidence is the fraction
    of covered instances whose label matches the rule's head class (0 when
    nothing is covered). The bitset, counts, and confidence are cached on the
    rule.
    """
    bits = ds.full_bits()
    for c in rule.antecedent:
        bits &= atom_bits[c] if atom_bits is not None else condition_bits(ds, c)
    count = bits.bit_count()
    n1 = (bits & ds.label_bits(1)).bit_count()
    counts = (count - n1, n1)
    conf = counts[rule.head_class] / count if count else 0.0
    rule.cov_exact = CoverageBitset(bits, ds.N, count)
    rule.class_counts = counts
    rule.conf = conf
    return count / ds.N, conf, counts


class RuleSet:
    """Ordered collection of rules with a default class for uncovered inputs.

    Prediction is unordered: every firing rule contributes its head, the sum
    is normalized, ties go to class 0.
    """

    def __init__(self, rules, default_class=0, class_names=("0", "1")):
        self.rules = list(rules)
        self.default_class = int(default_class)
        self.class_names = (str(class_names[0]), str(class_names[1]))

    def __len__(self):
        return len(self.rules)

    @property
    def total_conditions(self) -> int:
        return sum(r.n_conditions for r in self.rules)

    def predict(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (x.size,) or x.size == 0:
            raise DimensionMismatchError("expected a flat feature vector")
        s0 = s1 = 0.0
        fired = False
        for r in self.rules:
            if r.fires(x):
                fired = True
                s0 += r.head[0]
                s1 += r.head[1]
        if not fired:
            probs = (1.0, 0.0) if self.default_class == 0 else (0.0, 1.0)
            return self.default_class, probs
        total = s0 + s1
        probs = (s0 / total, s1 / total)
        return (0 if probs[0] >= probs[1] else 1), probs

    def predict_batch(self, X):
        """Vectorized prediction over a feature matrix; returns (classes, probs)."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2:
            raise DimensionMismatchError("expected a 2-D feature matrix")
        n = X.shape[0]
        scores = np.zeros((n, 2))
        covered = np.zeros(n, dtype=bool)
        for r in self.rules:
            if r.antecedent:
                mask = np.ones(n, dtype=bool)
                for c in r.antecedent:
                    col = X[:, c.feature]
                    mask &= col <= c.threshold if c.op == LE else col > c.threshold
            else:
                mask = np.ones(n, dtype=bool)
            covered |= mask
            scores[mask, 0] += r.head[0]
            scores[mask, 1] += r.head[1]
        totals = scores.sum(axis=1)
        probs = np.zeros((n, 2))
        np.divide(scores, totals[:, None], out=probs, where=totals[:, None] > 0)
        classes = (probs[:, 1] > probs[:, 0]).astype(np.int64)
        probs[~covered] = 0.0
        probs[~covered, self.default_class] = 1.0
        classes[~covered] = self.default_class
        return classes, probs

    def to_text(self, feature_names=None) -> str:
        lines = []
        for r in self.rules:
            parts = [f"IF {self._cond_text(r, feature_names)} THEN "
                     f"class={self.class_names[r.head_class]}"]
            stats = f" (p=[{r.head[0]:.2f},{r.head[1]:.2f}]"
            if r.cov_exact is not None:
                stats += f", cov={r.cov_exact.fraction:.2f}"
            if r.conf is not None:
                stats += f", conf={r.conf:.2f}"
            parts.append(stats + ")")
            lines.append("".join(parts))
        lines.append(f"ELSE class={self.class_names[self.default_class]}")
        return "\n".join(lines)

    @staticmethod
    def _cond_text(rule, feature_names):
        if not rule.antecedent:
            return "TRUE"
        out = []
        for c in rule.antecedent:
            name = feature_names[c.feature] if feature_names else f"x{c.feature}"
            out.append(f"{name} {'<=' if c.op == LE else '>'} {c.threshold:.2f}")
        return " AND ".join(out)

    def to_json(self) -> dict:
        rules = []
        for r in self.rules:
            rules.append({
                "conditions": [c.to_json() for c in r.antecedent],
                "head": list(r.head),
                "class_counts": list(r.class_counts) if r.class_counts is not None else None,
                "cov": r.cov_exact.fraction if r.cov_exact is not None else None,
                "conf": r.conf,
            })
        return {
            "rules": rules,
            "default_class": self.default_class,
            "class_names": list(self.class_names),
        }

    def to_json_str(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, obj) -> "RuleSet":
        rules = []
        for entry in obj["rules"]:
            antecedent = tuple(Condition.from_json(c) for c in entry["conditions"])
            counts = entry.get("class_counts")
            r = Rule(antecedent, tuple(entry["head"]),
                     class_counts=tuple(counts) if counts else None,
                     conf=entry.get("conf"))
            rules.append(r)
        return cls(rules, obj["default_class"], tuple(obj["class_names"]))
