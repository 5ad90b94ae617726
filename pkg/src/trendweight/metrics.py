"""Binary classification metrics with fake news (label 1) as one of the two positive views."""

from __future__ import annotations

import numpy as np


def _f1(tp: int, fp: int, fn: int) -> float:
    denom = 2 * tp + fp + fn
    if denom == 0:
        return 0.0
    return 2 * tp / denom


def compute_metrics(labels, predictions) -> dict[str, float]:
    """Accuracy, per-class F1, and their macro average.

    F1_fake treats label 1 as positive, F1_real treats label 0 as positive;
    an F1 with a zero denominator is reported as 0.
    """
    y = np.asarray(labels, dtype=np.int64)
    p = np.asarray(predictions, dtype=np.int64)
    if y.shape != p.shape:
        raise ValueError(f"length mismatch: {y.shape} vs {p.shape}")
    if y.size == 0:
        raise ValueError("compute_metrics needs at least one pair")

    tp = int(np.sum((y == 1) & (p == 1)))
    fp = int(np.sum((y == 0) & (p == 1)))
    fn = int(np.sum((y == 1) & (p == 0)))
    tn = int(np.sum((y == 0) & (p == 0)))

    f1_fake = _f1(tp, fp, fn)
    f1_real = _f1(tn, fn, fp)
    return {
        "accuracy": (tp + tn) / y.size,
        "macro_f1": (f1_fake + f1_real) / 2,
        "f1_fake": f1_fake,
        "f1_real": f1_real,
    }
