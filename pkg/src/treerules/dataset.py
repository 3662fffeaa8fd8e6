"""Binary-classification datasets, coverage bitsets, and stratified fold plans.

Every count the probabilistic tables and the exact baseline consume (N, N_y,
N_a, N_{a,y}) traces back to a :class:`Dataset`. Instance sets are
materialized as packed bitsets (arbitrary-precision ints) so that coverage
intersection, the hot operation of the exact evaluation path, is a single
``&`` plus ``bit_count``.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .conditions import GT, LE, Condition
from .errors import (
    FeatureOutOfRangeError,
    NaNValueError,
    NonNumericFeatureError,
    NotBinaryError,
    TooFewInstancesError,
)


def mask_to_bits(mask: np.ndarray) -> int:
    """Pack a boolean mask into an int whose bit i mirrors mask[i]."""
    return int.from_bytes(np.packbits(mask, bitorder="little").tobytes(), "little")


def bits_to_mask(bits: int, n: int) -> np.ndarray:
    raw = bits.to_bytes((n + 7) // 8, "little")
    unpacked = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")
    return unpacked[:n].view(np.bool_)


@dataclass(frozen=True)
class CoverageBitset:
    """Set of instance indices packed into an int, with its popcount."""

    bits: int
    n: int
    count: int = -1

    def __post_init__(self):
        if self.count < 0:
            object.__setattr__(self, "count", self.bits.bit_count())

    @classmethod
    def from_mask(cls, mask: np.ndarray) -> "CoverageBitset":
        return cls(mask_to_bits(mask), len(mask), int(np.count_nonzero(mask)))

    @classmethod
    def full(cls, n: int) -> "CoverageBitset":
        return cls((1 << n) - 1, n, n)

    @classmethod
    def empty(cls, n: int) -> "CoverageBitset":
        return cls(0, n, 0)

    def __and__(self, other: "CoverageBitset") -> "CoverageBitset":
        return CoverageBitset(self.bits & other.bits, self.n)

    def to_mask(self) -> np.ndarray:
        return bits_to_mask(self.bits, self.n)

    @property
    def fraction(self) -> float:
        return self.count / self.n


class Dataset:
    """Validated numeric feature matrix with binary labels.

    Immutable after construction; label bitsets are computed once and shared.
    """

    def __init__(self, features, labels, feature_names=None, class_names=("0", "1")):
        features = np.ascontiguousarray(features, dtype=np.float64)
        labels = np.asarray(labels, dtype=np.int64)
        if features.ndim != 2:
            raise ValueError("features must be a 2-D matrix")
        if features.shape[0] < 1 or features.shape[1] < 1:
            raise ValueError("need at least one instance and one feature")
        if labels.shape != (features.shape[0],):
            raise ValueError("labels length must equal the number of instances")
        if not np.all(np.isfinite(features)):
            raise NaNValueError("features contain NaN or infinite values")
        bad = set(np.unique(labels)) - {0, 1}
        if bad:
            raise NotBinaryError(f"labels must be 0 or 1, found {sorted(bad)}")
        self.features = features
        self.labels = labels
        self.feature_names = list(feature_names) if feature_names else [
            f"x{j}" for j in range(features.shape[1])
        ]
        if len(self.feature_names) != features.shape[1]:
            raise ValueError("feature_names length must equal feature count")
        self.class_names = (str(class_names[0]), str(class_names[1]))
        self._label_bits = None

    @property
    def N(self) -> int:
        return self.features.shape[0]

    @property
    def m(self) -> int:
        return self.features.shape[1]

    @property
    def C(self) -> int:
        return 2

    def class_counts(self) -> tuple:
        n1 = int(np.count_nonzero(self.labels))
        return (self.N - n1, n1)

    def label_bits(self, y: int) -> int:
        """Bitset of instances belonging to class y."""
        if self._label_bits is None:
            b1 = mask_to_bits(self.labels == 1)
            self._label_bits = (((1 << self.N) - 1) ^ b1, b1)
        return self._label_bits[y]

    def full_bits(self) -> int:
        return (1 << self.N) - 1

    def subset(self, indices) -> "Dataset":
        indices = np.asarray(indices)
        return Dataset(
            self.features[indices],
            self.labels[indices],
            self.feature_names,
            self.class_names,
        )


def eval_condition(ds: Dataset, cond: Condition) -> CoverageBitset:
    """Evaluate one threshold predicate over every instance."""
    if not 0 <= cond.feature < ds.m:
        raise FeatureOutOfRangeError(
            f"condition references feature {cond.feature}, dataset has m={ds.m}"
        )
    col = ds.features[:, cond.feature]
    mask = col <= cond.threshold if cond.op == LE else col > cond.threshold
    return CoverageBitset.from_mask(mask)


def condition_bits(ds: Dataset, cond: Condition) -> int:
    """Raw-int variant of :func:`eval_condition` for internal hot paths."""
    if not 0 <= cond.feature < ds.m:
        raise FeatureOutOfRangeError(
            f"condition references feature {cond.feature}, dataset has m={ds.m}"
        )
    col = ds.features[:, cond.feature]
    mask = col <= cond.threshold if cond.op == LE else col > cond.threshold
    return mask_to_bits(mask)


def load_csv(path, label_column=None) -> Dataset:
    """Load a comma-separated, headered file into a validated Dataset.

    The label column is chosen by name or positional index and defaults to
    the last column. Label strings map to {0, 1} with the lexicographically
    smaller string as class 0.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise NotBinaryError(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        if label_column is None:
            label_idx = len(header) - 1
        elif isinstance(label_column, int):
            if not 0 <= label_column < len(header):
                raise ValueError(f"label column index {label_column} out of range")
            label_idx = label_column
        else:
            try:
                label_idx = header.index(label_column)
            except ValueError:
                raise ValueError(f"label column {label_column!r} not in header {header}") from None

        feature_names = [h for i, h in enumerate(header) if i != label_idx]
        rows, raw_labels = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise NonNumericFeatureError(
                    f"{path}:{lineno}: expected {len(header)} cells, found {len(row)}"
                )
            vals = []
            for i, cell in enumerate(row):
                if i == label_idx:
                    continue
                try:
                    v = float(cell)
                except ValueError:
                    raise NonNumericFeatureError(
                        f"{path}:{lineno}: non-numeric value {cell!r} in column {header[i]!r}"
                    ) from None
                if not np.isfinite(v):
                    raise NaNValueError(
                        f"{path}:{lineno}: NaN/inf value in column {header[i]!r}"
                    )
                vals.append(v)
            rows.append(vals)
            raw_labels.append(row[label_idx].strip())

    if not rows:
        raise NotBinaryError(f"{path}: no data rows")
    distinct = sorted(set(raw_labels))
    if len(distinct) > 2:
        raise NotBinaryError(f"{path}: label column has {len(distinct)} distinct values")
    # A single-valued label column still loads (class 1 stays empty); any
    # operation that needs both classes rejects it later.
    class_names = (distinct[0], distinct[1] if len(distinct) == 2 else "")
    mapping = {name: y for y, name in enumerate(distinct)}
    labels = np.array([mapping[v] for v in raw_labels], dtype=np.int64)
    return Dataset(np.array(rows, dtype=np.float64), labels, feature_names, class_names)


@dataclass(frozen=True)
class FoldPlan:
    """Per-repeat, per-instance test-fold assignment for repeated stratified CV."""

    repeats: int
    folds: int
    seed: int
    assignments: np.ndarray  # shape (repeats, N), int fold index

    def test_indices(self, repeat: int, fold: int) -> np.ndarray:
        return np.nonzero(self.assignments[repeat] == fold)[0]

    def train_indices(self, repeat: int, fold: int) -> np.ndarray:
        return np.nonzero(self.assignments[repeat] != fold)[0]

    def iter_splits(self):
        for r in range(self.repeats):
            for f in range(self.folds):
                yield r, f, self.train_indices(r, f), self.test_indices(r, f)


def stratified_folds(ds: Dataset, repeats: int, folds: int, seed: int) -> FoldPlan:
    """Assign instances to folds class-by-class, round-robin after a seeded shuffle."""
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    if folds < 2:
        raise ValueError("folds must be >= 2")
    for y in (0, 1):
        members = int(np.count_nonzero(ds.labels == y))
        if members < folds:
            raise TooFewInstancesError(
                f"class {y} has {members} instances, fewer than {folds} folds"
            )
    assignments = np.empty((repeats, ds.N), dtype=np.int64)
    for r in range(repeats):
        rng = np.random.default_rng([seed, r])
        for y in (0, 1):
            idx = np.nonzero(ds.labels == y)[0]
            idx = rng.permutation(idx)
            assignments[r, idx] = np.arange(len(idx)) % folds
    return FoldPlan(repeats, folds, seed, assignments)
