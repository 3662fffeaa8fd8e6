"""Shared fixtures: tiny hand-built datasets, synthetic generators, and a
resolver for the public benchmark CSVs (skipped when not present)."""

import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from treerules import Dataset, load_csv

settings.register_profile(
    "deterministic", derandomize=True, deadline=None,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("deterministic")

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
DATA_DIR = os.environ.get("TREERULES_DATA", os.path.join(REPO_ROOT, "data"))

# name -> (expected rows, expected feature count); see README for sources.
PUBLIC_DATASETS = {
    "banknote": (1372, 4),
    "pima": (768, 8),
    "haberman": (306, 3),
    "wisconsin": (683, 9),
    "heart": (270, 13),
}


def public_dataset_path(name: str) -> str:
    return os.path.join(DATA_DIR, f"{name}.csv")


def load_public_dataset(name: str):
    """Load a benchmark CSV from the data directory, or None if absent."""
    path = public_dataset_path(name)
    if not os.path.exists(path):
        return None
    return load_csv(path)


def require_public_dataset(name: str) -> Dataset:
    ds = load_public_dataset(name)
    if ds is None:
        pytest.skip(
            f"dataset file {public_dataset_path(name)} not present; "
            "see README section 'Benchmark datasets'")
    return ds


def synthetic_dataset(n: int, m: int, seed: int, flip: float = 0.05) -> Dataset:
    """Seeded synthetic binary problem with a few informative features."""
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, m))
    score = X[:, 0] + 0.8 * X[:, 1 % m] - 0.6 * X[:, 2 % m] \
        + 0.5 * X[:, 0] * X[:, 1 % m]
    y = (score > 0).astype(np.int64)
    if flip > 0:
        flips = rng.random(n) < flip
        y[flips] = 1 - y[flips]
    # make sure both classes exist even at tiny n
    if y.min() == y.max():
        y[0] = 1 - y[0]
    return Dataset(X, y)


@pytest.fixture
def tiny_ds():
    """10 instances, x0 = 0..9, first four labelled 0."""
    X = np.arange(10, dtype=float).reshape(-1, 1)
    y = np.array([0, 0, 0, 0, 1, 1, 1, 1, 1, 1])
    return Dataset(X, y)


def xor_fixture():
    """50 instances on a 2-D grid with XOR labels, plus two hand-built stumps.

    Cells (x0, x1) -> (count, label):
      (0,0) -> 14 of class 0, (0,1) -> 12 of class 1,
      (1,0) -> 16 of class 1, (1,1) ->  8 of class 0.
    """
    from treerules import Ensemble, TreeNode

    rows, labels = [], []
    for (x0, x1), (count, y) in {
        (0.0, 0.0): (14, 0),
        (0.0, 1.0): (12, 1),
        (1.0, 0.0): (16, 1),
        (1.0, 1.0): (8, 0),
    }.items():
        rows.extend([[x0, x1]] * count)
        labels.extend([y] * count)
    ds = Dataset(np.array(rows), np.array(labels))
    stump0 = TreeNode.split(0, 0.5, TreeNode.leaf((14, 12)), TreeNode.leaf((8, 16)))
    stump1 = TreeNode.split(1, 0.5, TreeNode.leaf((14, 16)), TreeNode.leaf((8, 12)))
    return ds, Ensemble([stump0, stump1], "independent", 2)


def separable_fixture():
    """50 instances where class equals (x0 > 0.5); x1 carries little signal."""
    from treerules import Ensemble, TreeNode

    rows, labels = [], []
    for (x0, x1), (count, y) in {
        (0.0, 0.0): (14, 0),
        (0.0, 1.0): (11, 0),
        (1.0, 0.0): (12, 1),
        (1.0, 1.0): (13, 1),
    }.items():
        rows.extend([[x0, x1]] * count)
        labels.extend([y] * count)
    ds = Dataset(np.array(rows), np.array(labels))
    stump0 = TreeNode.split(0, 0.5, TreeNode.leaf((25, 0)), TreeNode.leaf((0, 25)))
    stump1 = TreeNode.split(1, 0.5, TreeNode.leaf((14, 12)), TreeNode.leaf((11, 13)))
    return ds, Ensemble([stump0, stump1], "independent", 2)
