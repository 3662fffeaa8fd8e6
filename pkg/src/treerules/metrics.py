"""Classification metrics shared by the simplifier and the benchmark harness."""

import numpy as np

from .errors import LengthMismatchError


def f1_score(predictions, labels, positive_class: int = 1) -> float:
    """Harmonic mean of precision and recall for one class; 0 when degenerate."""
    preds = np.asarray(predictions)
    labs = np.asarray(labels)
    if preds.shape != labs.shape or preds.size == 0:
        raise LengthMismatchError(
            f"predictions ({preds.size}) and labels ({labs.size}) must be "
            "equal-length and non-empty")
    pos_pred = preds == positive_class
    pos_true = labs == positive_class
    tp = int(np.count_nonzero(pos_pred & pos_true))
    fp = int(np.count_nonzero(pos_pred & ~pos_true))
    fn = int(np.count_nonzero(~pos_pred & pos_true))
    denom = 2 * tp + fp + fn
    return 2 * tp / denom if denom else 0.0


def accuracy_score(predictions, labels) -> float:
    preds = np.asarray(predictions)
    labs = np.asarray(labels)
    if preds.shape != labs.shape or preds.size == 0:
        raise LengthMismatchError(
            f"predictions ({preds.size}) and labels ({labs.size}) must be "
            "equal-length and non-empty")
    return float(np.count_nonzero(preds == labs) / preds.size)
