"""Binary decision trees and ensembles with per-leaf class counts.

Provides a native Gini/CART trainer (single trees and bootstrapped forests)
plus a JSON import/export path so externally trained ensembles, including
boosted ones, can be simplified. Imported leaf payloads are ignored: class
counts are always recomputed by routing the supplied training data, because
every downstream statistic depends on leaf-level class counts being real
counts over a known sample.
"""

import json
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateDataError,
    DimensionMismatchError,
    FeatureOutOfRangeError,
    SchemaError,
)


class TreeNode:
    """Either an internal split (feature, threshold, left, right) or a leaf
    carrying a (count_class0, count_class1) pair. Left means x <= threshold."""

    __slots__ = ("feature", "threshold", "left", "right", "class_counts")

    def __init__(self, feature=None, threshold=None, left=None, right=None,
                 class_counts=None):
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right
        self.class_counts = class_counts

    @classmethod
    def leaf(cls, class_counts) -> "TreeNode":
        return cls(class_counts=(int(class_counts[0]), int(class_counts[1])))

    @classmethod
    def split(cls, feature, threshold, left, right) -> "TreeNode":
        return cls(feature=int(feature), threshold=float(threshold),
                   left=left, right=right)

    def is_leaf(self) -> bool:
        return self.class_counts is not None


@dataclass(frozen=True)
class TrainConfig:
    n_trees: int = 100
    max_depth: int = 4
    bootstrap: bool = True
    feature_subsample: float = 1.0
    min_leaf: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.min_leaf < 1:
            raise ValueError("min_leaf must be >= 1")
        if not 0.0 < self.feature_subsample <= 1.0:
            raise ValueError("feature_subsample must be in (0, 1]")


@dataclass(frozen=True)
class Ensemble:
    trees: list
    kind: str  # "independent" (vote) or "dependent" (summed distributions)
    m: int


def _best_split_on_feature(col, y1, min_leaf):
    """Best threshold for one feature: (threshold, weighted child Gini) or None.

    Candidates are midpoints between consecutive distinct sorted values; the
    first minimal-impurity candidate wins, i.e. ties break to the lower
    threshold.
    """
    order = np.argsort(col, kind="stable")
    sv = col[order]
    sy = y1[order]
    change = np.nonzero(sv[:-1] != sv[1:])[0]
    if change.size == 0:
        return None
    n = col.size
    n_left = change + 1
    n_right = n - n_left
    valid = (n_left >= min_leaf) & (n_right >= min_leaf)
    if not np.any(valid):
        return None
    cum1 = np.cumsum(sy)
    left1 = cum1[change]
    right1 = cum1[-1] - left1
    gini_l = 1.0 - (left1 / n_left) ** 2 - ((n_left - left1) / n_left) ** 2
    gini_r = 1.0 - (right1 / n_right) ** 2 - ((n_right - right1) / n_right) ** 2
    child = (n_left * gini_l + n_right * gini_r) / n
    child[~valid] = np.inf
    best = int(np.argmin(child))
    threshold = (sv[change[best]] + sv[change[best] + 1]) / 2.0
    return threshold, float(child[best])


def _build_tree(X, y, depth, cfg: TrainConfig, rng) -> TreeNode:
    n = y.size
    n1 = int(y.sum())
    counts = (n - n1, n1)
    if depth >= cfg.max_depth or n1 == 0 or n1 == n or n < 2 * cfg.min_leaf:
        return TreeNode.leaf(counts)

    m = X.shape[1]
    if cfg.feature_subsample < 1.0:
        k = max(1, int(round(cfg.feature_subsample * m)))
        features = np.sort(rng.choice(m, size=k, replace=False))
    else:
        features = range(m)

    best = None  # (child_impurity, feature, threshold)
    for f in features:
        found = _best_split_on_feature(X[:, f], y, cfg.min_leaf)
        if found is None:
            continue
        threshold, child = found
        if best is None or child < best[0]:
            best = (child, f, threshold)
    if best is None:
        return TreeNode.leaf(counts)

    _, f, threshold = best
    mask = X[:, f] <= threshold
    left = _build_tree(X[mask], y[mask], depth + 1, cfg, rng)
    right = _build_tree(X[~mask], y[~mask], depth + 1, cfg, rng)
    return TreeNode.split(f, threshold, left, right)


def train_cart(ds, cfg: TrainConfig) -> Ensemble:
    """Train a single greedy Gini tree on the full dataset (no bootstrap)."""
    if ds.N == 0:
        raise DegenerateDataError("cannot train on an empty dataset")
    rng = np.random.default_rng(cfg.seed)
    tree = _build_tree(ds.features, ds.labels, 0, cfg, rng)
    return Ensemble([tree], "independent", ds.m)


def train_forest(ds, cfg: TrainConfig) -> Ensemble:
    """Train a bagged forest; each tree gets its own seeded RNG stream."""
    if ds.N == 0:
        raise DegenerateDataError("cannot train on an empty dataset")
    streams = np.random.SeedSequence(cfg.seed).spawn(cfg.n_trees)
    trees = []
    for stream in streams:
        rng = np.random.default_rng(stream)
        if cfg.bootstrap:
            idx = rng.integers(0, ds.N, size=ds.N)
            Xb, yb = ds.features[idx], ds.labels[idx]
        else:
            Xb, yb = ds.features, ds.labels
        trees.append(_build_tree(Xb, yb, 0, cfg, rng))
    return Ensemble(trees, "independent", ds.m)


def _leaf_distributions(node: TreeNode, X, idx, out):
    if node.is_leaf():
        c0, c1 = node.class_counts
        total = c0 + c1
        if total > 0:
            out[idx, 0] = c0 / total
            out[idx, 1] = c1 / total
        else:
            out[idx] = 0.5
        return
    mask = X[idx, node.feature] <= node.threshold
    _leaf_distributions(node.left, X, idx[mask], out)
    _leaf_distributions(node.right, X, idx[~mask], out)


def predict_ensemble_batch(H: Ensemble, X) -> np.ndarray:
    """Predicted class per row: majority vote for independent ensembles,
    argmax of summed leaf distributions for dependent ones; ties to class 0."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != H.m:
        raise DimensionMismatchError(f"expected shape (n, {H.m})")
    n = X.shape[0]
    idx = np.arange(n)
    dist = np.empty((n, 2))
    agg = np.zeros((n, 2))
    for tree in H.trees:
        _leaf_distributions(tree, X, idx, dist)
        if H.kind == "independent":
            votes = (dist[:, 1] > dist[:, 0]).astype(np.int64)
            agg[idx, votes] += 1.0
        else:
            agg += dist
    return (agg[:, 1] > agg[:, 0]).astype(np.int64)


def predict_ensemble(H: Ensemble, x) -> int:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (H.m,):
        raise DimensionMismatchError(f"expected a feature vector of length {H.m}")
    return int(predict_ensemble_batch(H, x[None, :])[0])


def _count_leaves(node: TreeNode) -> int:
    if node.is_leaf():
        return 1
    return _count_leaves(node.left) + _count_leaves(node.right)


def n_rules(H: Ensemble) -> int:
    """Total root-to-leaf paths across the ensemble's trees."""
    return sum(_count_leaves(t) for t in H.trees)


def _node_to_json(node: TreeNode):
    if node.is_leaf():
        return {"counts": list(node.class_counts)}
    return {
        "feature": node.feature,
        "threshold": node.threshold,
        "left": _node_to_json(node.left),
        "right": _node_to_json(node.right),
    }


def export_json(H: Ensemble) -> dict:
    return {"kind": H.kind, "m": H.m, "trees": [_node_to_json(t) for t in H.trees]}


def export_json_file(H: Ensemble, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(export_json(H), fh, indent=2)


def _node_from_json(obj, m: int) -> TreeNode:
    if not isinstance(obj, dict):
        raise SchemaError("tree node must be a JSON object")
    if "feature" in obj:
        for key in ("threshold", "left", "right"):
            if key not in obj:
                raise SchemaError(f"internal node missing {key!r}")
        feature = obj["feature"]
        if not isinstance(feature, int) or isinstance(feature, bool):
            raise SchemaError("feature index must be an integer")
        if not 0 <= feature < m:
            raise FeatureOutOfRangeError(
                f"node references feature {feature}, dataset has m={m}")
        threshold = obj["threshold"]
        if not isinstance(threshold, (int, float)) or not np.isfinite(threshold):
            raise SchemaError("threshold must be a finite number")
        return TreeNode.split(feature, threshold,
                              _node_from_json(obj["left"], m),
                              _node_from_json(obj["right"], m))
    # Leaf: counts are optional on import and ignored; recomputed by routing.
    return TreeNode.leaf((0, 0))


def _recount_leaves(node: TreeNode, X, labels, idx):
    if node.is_leaf():
        n1 = int(labels[idx].sum())
        node.class_counts = (idx.size - n1, n1)
        return
    mask = X[idx, node.feature] <= node.threshold
    _recount_leaves(node.left, X, labels, idx[mask])
    _recount_leaves(node.right, X, labels, idx[~mask])


def import_json(source, ds) -> Ensemble:
    """Load an ensemble from a JSON file/dict and recount leaves on ds."""
    if isinstance(source, dict):
        obj = source
    else:
        with open(source, encoding="utf-8") as fh:
            obj = json.load(fh)
    if not isinstance(obj, dict):
        raise SchemaError("ensemble document must be a JSON object")
    kind = obj.get("kind")
    if kind not in ("independent", "dependent"):
        raise SchemaError(f"kind must be 'independent' or 'dependent', got {kind!r}")
    m = obj.get("m")
    if not isinstance(m, int) or m < 1:
        raise SchemaError("m must be a positive integer")
    if m != ds.m:
        raise SchemaError(f"ensemble expects m={m} features, dataset has {ds.m}")
    trees_json = obj.get("trees")
    if not isinstance(trees_json, list) or not trees_json:
        raise SchemaError("trees must be a non-empty array")
    trees = [_node_from_json(t, ds.m) for t in trees_json]
    idx = np.arange(ds.N)
    for tree in trees:
        _recount_leaves(tree, ds.features, ds.labels, idx)
    return Ensemble(trees, kind, ds.m)
