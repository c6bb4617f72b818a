"""Classification metrics: accuracy, macro recall, macro F1, and ROC AUC.

All metrics are computed from integer label vectors (and, for AUC, a score
matrix) with exact tie and edge-case semantics:

- accuracy is reported in percent,
- macro recall and macro F1 average only over classes that occur in the
  truth vector, with 0/0 ratios defined as 0,
- AUC is the probability that a uniformly random positive scores above a
  uniformly random negative, ties counting one half.  The implementation
  uses the rank-sum identity, which equals the pairwise definition exactly
  (ranks of ties are averaged, so each tied pair contributes exactly 0.5).
"""

from __future__ import annotations

from dataclasses import dataclass
from operator import eq

import numpy as np

from .errors import (
    EmptyInputError,
    LengthMismatchError,
    NoPositivePairsError,
    ShapeMismatchError,
)


@dataclass(frozen=True)
class MetricsReport:
    """One evaluation: accuracy in percent, the other three in [0, 1]."""

    accuracy_pct: float
    recall: float
    f1: float
    auc_roc: float
    n_samples: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.accuracy_pct <= 100.0:
            raise ValueError(f"accuracy_pct out of range: {self.accuracy_pct}")
        for name in ("recall", "f1", "auc_roc"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} out of range: {value}")
        if self.n_samples <= 0:
            raise ValueError(f"n_samples must be positive, got {self.n_samples}")


# below this size the label metrics run on plain python ints; numpy's
# per-call overhead dwarfs the actual work for tiny inputs
_SMALL = 64


def _small_pair(pred, truth) -> tuple[list[int], list[int]] | None:
    """Fast-path extraction for small 1-d integer arrays, else None."""
    if not (isinstance(pred, np.ndarray) and isinstance(truth, np.ndarray)):
        return None
    if pred.ndim != 1 or truth.ndim != 1 or pred.dtype.kind != "i" or truth.dtype.kind != "i":
        return None
    if pred.shape[0] > _SMALL:
        return None
    if pred.shape[0] != truth.shape[0]:
        raise LengthMismatchError(
            f"pred has {pred.shape[0]} entries, truth has {truth.shape[0]}"
        )
    if pred.shape[0] == 0:
        raise EmptyInputError("metrics need at least one sample")
    return pred.tolist(), truth.tolist()


def _check_small_classes(n_classes: int) -> None:
    if n_classes < 2:
        raise ValueError(f"n_classes must be at least 2, got {n_classes}")


def _as_labels(values, name: str) -> np.ndarray:
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise ShapeMismatchError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        rounded = np.asarray(values, dtype=np.int64)
        if not np.array_equal(rounded, arr):
            raise ValueError(f"{name} must hold integer labels")
        arr = rounded
    return arr.astype(np.int64, copy=False)


def _check_pair(pred, truth) -> tuple[np.ndarray, np.ndarray]:
    p = _as_labels(pred, "pred")
    t = _as_labels(truth, "truth")
    if p.shape[0] != t.shape[0]:
        raise LengthMismatchError(f"pred has {p.shape[0]} entries, truth has {t.shape[0]}")
    if p.shape[0] == 0:
        raise EmptyInputError("metrics need at least one sample")
    return p, t


def _confusion(pred: np.ndarray, truth: np.ndarray, n_classes: int) -> np.ndarray:
    if n_classes < 2:
        raise ValueError(f"n_classes must be at least 2, got {n_classes}")
    if pred.min() < 0 or pred.max() >= n_classes:
        raise ValueError("pred labels outside [0, n_classes)")
    if truth.min() < 0 or truth.max() >= n_classes:
        raise ValueError("truth labels outside [0, n_classes)")
    # confusion[i, j] counts samples with truth i predicted j
    flat = truth * n_classes + pred
    return np.bincount(flat, minlength=n_classes * n_classes).reshape(n_classes, n_classes)


def accuracy(pred, truth) -> float:
    """Fraction of exact matches, in percent."""
    small = _small_pair(pred, truth)
    if small is not None:
        p, t = small
        return 100.0 * sum(map(eq, p, t)) / len(p)
    p, t = _check_pair(pred, truth)
    return 100.0 * float(np.mean(p == t))


def recall_macro(pred, truth, n_classes: int) -> float:
    """Mean per-class recall over the classes present in truth."""
    small = _small_pair(pred, truth)
    if small is not None:
        _check_small_classes(n_classes)
        p, t = small
        if min(p) < 0 or max(p) >= n_classes:
            raise ValueError("labels outside [0, n_classes)")
        hits = tuple(zip(p, t)).count
        support_of = t.count
        total = 0.0
        present = 0
        covered = 0
        for c in range(n_classes):
            support = support_of(c)
            if support:
                covered += support
                total += hits((c, c)) / support
                present += 1
        if covered != len(t):  # some truth label fell outside [0, n_classes)
            raise ValueError("labels outside [0, n_classes)")
        return total / present
    p, t = _check_pair(pred, truth)
    cm = _confusion(p, t, n_classes)
    support = cm.sum(axis=1)
    present = support > 0
    per_class = cm.diagonal()[present] / support[present]
    return float(np.mean(per_class))


def f1_macro(pred, truth, n_classes: int) -> float:
    """Mean per-class F1 over the classes present in truth; 0/0 counts as 0."""
    small = _small_pair(pred, truth)
    if small is not None:
        _check_small_classes(n_classes)
        p, t = small
        if min(p) < 0 or max(p) >= n_classes:
            raise ValueError("labels outside [0, n_classes)")
        hits = tuple(zip(p, t)).count
        support_of = t.count
        predicted_of = p.count
        total = 0.0
        present = 0
        covered = 0
        for c in range(n_classes):
            support = support_of(c)
            if support:
                covered += support
                # F1 = 2 TP / (support + predicted); the denominator is
                # positive whenever the class occurs in truth
                total += 2.0 * hits((c, c)) / (support + predicted_of(c))
                present += 1
        if covered != len(t):  # some truth label fell outside [0, n_classes)
            raise ValueError("labels outside [0, n_classes)")
        return total / present
    p, t = _check_pair(pred, truth)
    cm = _confusion(p, t, n_classes)
    tp = cm.diagonal().astype(np.float64)
    support = cm.sum(axis=1)
    predicted = cm.sum(axis=0)
    present = support > 0
    per_class = 2.0 * tp[present] / (support + predicted)[present]
    return float(np.mean(per_class))


def _average_ranks(scores: np.ndarray) -> np.ndarray:
    """1-based ranks with ties assigned the mean of their rank range."""
    _, inverse, counts = np.unique(scores, return_inverse=True, return_counts=True)
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    # value with count c starting at 0-based sorted position p has mean rank p + (c + 1) / 2
    mean_rank = starts + (counts + 1) / 2.0
    return mean_rank[inverse]


def _binary_auc(scores: np.ndarray, positive: np.ndarray) -> float | None:
    """AUC for one positive-vs-rest column, or None when it is undefined."""
    n_pos = int(positive.sum())
    n_neg = positive.size - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = _average_ranks(scores)
    u = float(np.sum(ranks[positive])) - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


def auc_roc(scores, truth, n_classes: int) -> float:
    """ROC AUC; one-vs-rest macro average when n_classes exceeds 2.

    For the binary case ``scores`` may be a vector of positive-class scores
    or an (n, 2) matrix whose second column is used.  For three or more
    classes an (n, n_classes) matrix is required and classes lacking either
    positives or negatives are excluded from the average.  When no class
    contributes, NoPositivePairsError is raised.
    """
    t = _as_labels(truth, "truth")
    if t.size == 0:
        raise EmptyInputError("metrics need at least one sample")
    if n_classes < 2:
        raise ValueError(f"n_classes must be at least 2, got {n_classes}")
    if t.min() < 0 or t.max() >= n_classes:
        raise ValueError("truth labels outside [0, n_classes)")
    s = np.asarray(scores, dtype=np.float64)
    if s.ndim == 2 and s.shape[1] == 1:
        s = s[:, 0]
    if s.shape[0] != t.shape[0]:
        raise LengthMismatchError(f"scores cover {s.shape[0]} samples, truth {t.shape[0]}")
    if not np.all(np.isfinite(s)):
        raise ValueError("scores must be finite")

    if n_classes == 2:
        if s.ndim == 1:
            column = s
        elif s.ndim == 2 and s.shape[1] == 2:
            column = s[:, 1]
        else:
            raise ShapeMismatchError(f"binary AUC needs a vector or (n, 2) scores, got {s.shape}")
        value = _binary_auc(column, t == 1)
        if value is None:
            raise NoPositivePairsError("truth holds a single class; AUC undefined")
        return value

    if s.ndim != 2 or s.shape[1] != n_classes:
        raise ShapeMismatchError(f"expected (n, {n_classes}) scores, got {s.shape}")
    per_class = []
    for c in range(n_classes):
        value = _binary_auc(s[:, c], t == c)
        if value is not None:
            per_class.append(value)
    if not per_class:
        raise NoPositivePairsError("no class has both positives and negatives; AUC undefined")
    return float(np.mean(per_class))


def compute_report(pred, truth, scores, n_classes: int) -> MetricsReport:
    """Bundle the four metrics for one prediction set."""
    p, t = _check_pair(pred, truth)
    return MetricsReport(
        accuracy_pct=accuracy(p, t),
        recall=recall_macro(p, t, n_classes),
        f1=f1_macro(p, t, n_classes),
        auc_roc=auc_roc(scores, t, n_classes),
        n_samples=int(t.shape[0]),
    )
