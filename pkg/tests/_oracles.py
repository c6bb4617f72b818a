"""Independent reference implementations used to check the package.

Everything here is written the slow, obvious way: explicit loops straight
from the definitions, exact rational arithmetic where it matters.  Nothing
imports from the package, so agreement between these and the fast
implementations is meaningful evidence.
"""

from __future__ import annotations

from fractions import Fraction


def naive_accuracy(pred, truth) -> float:
    hits = sum(1 for p, t in zip(pred, truth) if p == t)
    return 100.0 * hits / len(truth)


def naive_recall_macro(pred, truth, n_classes: int) -> float:
    recalls = []
    for c in range(n_classes):
        tp = sum(1 for p, t in zip(pred, truth) if t == c and p == c)
        fn = sum(1 for p, t in zip(pred, truth) if t == c and p != c)
        if tp + fn == 0:
            continue  # class absent from truth
        recalls.append(tp / (tp + fn))
    return sum(recalls) / len(recalls)


def naive_f1_macro(pred, truth, n_classes: int) -> float:
    f1s = []
    for c in range(n_classes):
        tp = sum(1 for p, t in zip(pred, truth) if t == c and p == c)
        fn = sum(1 for p, t in zip(pred, truth) if t == c and p != c)
        fp = sum(1 for p, t in zip(pred, truth) if t != c and p == c)
        if tp + fn == 0:
            continue  # class absent from truth
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn)
        if precision + recall == 0.0:
            f1s.append(0.0)
        else:
            f1s.append(2.0 * precision * recall / (precision + recall))
    return sum(f1s) / len(f1s)


def naive_auc_binary(scores, positive) -> float | None:
    """Pairwise definition: wins count 1, ties 0.5; None when undefined."""
    pos = [s for s, is_pos in zip(scores, positive) if is_pos]
    neg = [s for s, is_pos in zip(scores, positive) if not is_pos]
    if not pos or not neg:
        return None
    total = 0.0
    for sp in pos:
        for sn in neg:
            if sp > sn:
                total += 1.0
            elif sp == sn:
                total += 0.5
    return total / (len(pos) * len(neg))


def naive_auc(scores, truth, n_classes: int) -> float | None:
    """Macro one-vs-rest AUC; binary uses the positive-class column."""
    if n_classes == 2:
        column = [row[1] if hasattr(row, "__len__") else row for row in scores]
        return naive_auc_binary(column, [t == 1 for t in truth])
    per_class = []
    for c in range(n_classes):
        value = naive_auc_binary([row[c] for row in scores], [t == c for t in truth])
        if value is not None:
            per_class.append(value)
    if not per_class:
        return None
    return sum(per_class) / len(per_class)


def exact_weighted_average(vectors, counts):
    """Fraction-exact FedAvg of plain float lists; returns floats."""
    total = sum(counts)
    out = []
    for entries in zip(*vectors):
        acc = Fraction(0)
        for value, count in zip(entries, counts):
            acc += Fraction(value) * Fraction(count, total)
        out.append(float(acc))
    return out
