"""Three classifiers trained from scratch on encoded tabular data.

- logistic regression: full-batch gradient descent on L2-regularized
  cross-entropy (sigmoid when binary, softmax otherwise),
- linear SVM: per-sample subgradient descent on the L2-regularized hinge
  loss, one-vs-rest for three or more classes, with a seeded per-epoch
  permutation and a 1/t learning-rate decay,
- random forest: bagged CART trees split on Gini impurity with a fresh
  ceil(sqrt(d)) feature subset at every node.

The bias terms are never regularized.  Training with epochs = 0 returns the
initial parameters unchanged, which is what federated warm starts rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import EncodedDataset
from .errors import InvalidConfigError, ShapeMismatchError

MODEL_KINDS = ("logistic", "svm", "forest")


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 300
    l2: float = 1e-3
    n_trees: int = 100
    max_depth: int = 12
    min_leaf: int = 2
    seed: int = 0

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise InvalidConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.epochs < 0:
            raise InvalidConfigError(f"epochs must be non-negative, got {self.epochs}")
        if self.l2 < 0:
            raise InvalidConfigError(f"l2 must be non-negative, got {self.l2}")
        if self.n_trees < 1:
            raise InvalidConfigError(f"n_trees must be at least 1, got {self.n_trees}")
        if self.max_depth < 1:
            raise InvalidConfigError(f"max_depth must be at least 1, got {self.max_depth}")
        if self.min_leaf < 1:
            raise InvalidConfigError(f"min_leaf must be at least 1, got {self.min_leaf}")


DEFAULT_TRAIN_CONFIGS = {
    "logistic": TrainConfig(learning_rate=0.1, epochs=300, l2=1e-3),
    "svm": TrainConfig(learning_rate=0.05, epochs=300, l2=1e-3),
    "forest": TrainConfig(n_trees=100, max_depth=12, min_leaf=2),
}


@dataclass(frozen=True, eq=False)
class LinearModel:
    """Weight matrix plus bias; one row when binary, one row per class otherwise."""

    weights: np.ndarray
    bias: np.ndarray
    kind: str
    n_classes: int

    def __post_init__(self) -> None:
        if self.kind not in ("logistic", "svm"):
            raise InvalidConfigError(f"unknown linear model kind {self.kind!r}")
        if self.n_classes < 2:
            raise InvalidConfigError(f"n_classes must be at least 2, got {self.n_classes}")
        rows = 1 if self.n_classes == 2 else self.n_classes
        if self.weights.ndim != 2 or self.weights.shape[0] != rows:
            raise ShapeMismatchError(
                f"expected weights with {rows} rows, got shape {self.weights.shape}"
            )
        if self.bias.shape != (rows,):
            raise ShapeMismatchError(f"expected bias of shape ({rows},), got {self.bias.shape}")
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.bias))):
            raise ValueError("model parameters must be finite")

    @property
    def n_features(self) -> int:
        return int(self.weights.shape[1])


class TreeNode:
    """One CART node; leaves carry raw class counts from their training rows."""

    __slots__ = ("feature_index", "threshold", "left", "right", "class_counts")

    def __init__(self, feature_index=None, threshold=None, left=None, right=None, class_counts=None):
        self.feature_index = feature_index
        self.threshold = threshold
        self.left = left
        self.right = right
        self.class_counts = class_counts

    @property
    def is_leaf(self) -> bool:
        return self.class_counts is not None


@dataclass(frozen=True, eq=False)
class Forest:
    trees: tuple[TreeNode, ...]
    n_classes: int
    n_features: int

    def __post_init__(self) -> None:
        if not self.trees:
            raise InvalidConfigError("a forest needs at least one tree")
        if self.n_classes < 2 or self.n_features < 1:
            raise InvalidConfigError("invalid forest dimensions")


Model = LinearModel | Forest


def _check_train_inputs(train: EncodedDataset) -> None:
    if train.n_samples == 0:
        raise ShapeMismatchError("cannot train on an empty dataset")


def _check_init(init: LinearModel, kind: str, train: EncodedDataset) -> None:
    if init.kind != kind:
        raise ShapeMismatchError(f"init model is {init.kind!r}, expected {kind!r}")
    if init.n_classes != train.n_classes:
        raise ShapeMismatchError(
            f"init covers {init.n_classes} classes, data has {train.n_classes}"
        )
    if init.n_features != train.n_features:
        raise ShapeMismatchError(
            f"init expects {init.n_features} features, data has {train.n_features}"
        )


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=1, keepdims=True)
    ez = np.exp(shifted)
    return ez / ez.sum(axis=1, keepdims=True)


def logistic_loss(model: LinearModel, X: np.ndarray, y: np.ndarray, l2: float) -> float:
    """Mean cross-entropy plus (l2 / 2) * ||W||^2; the bias is not penalized."""
    z = X @ model.weights.T + model.bias
    if model.n_classes == 2:
        margin = z[:, 0]
        target = y.astype(np.float64)
        # stable form of log(1 + exp(z)) - y * z
        ce = np.maximum(margin, 0.0) - margin * target + np.log1p(np.exp(-np.abs(margin)))
        data_term = float(np.mean(ce))
    else:
        logz = z - z.max(axis=1, keepdims=True)
        log_norm = np.log(np.exp(logz).sum(axis=1))
        data_term = float(np.mean(log_norm - logz[np.arange(y.shape[0]), y]))
    return data_term + 0.5 * l2 * float(np.sum(model.weights**2))


def logistic_gradient(
    model: LinearModel, X: np.ndarray, y: np.ndarray, l2: float
) -> tuple[np.ndarray, np.ndarray]:
    """Gradient of logistic_loss with respect to (weights, bias)."""
    n = X.shape[0]
    z = X @ model.weights.T + model.bias
    if model.n_classes == 2:
        p = _sigmoid(z[:, 0])
        residual = (p - y)[:, None]
    else:
        p = _softmax(z)
        p[np.arange(n), y] -= 1.0
        residual = p
    grad_w = residual.T @ X / n + l2 * model.weights
    grad_b = residual.sum(axis=0) / n
    return grad_w, grad_b


def train_logreg(
    train: EncodedDataset, cfg: TrainConfig, init: LinearModel | None = None
) -> LinearModel:
    """Full-batch gradient descent; deterministic, no randomness involved."""
    _check_train_inputs(train)
    rows = 1 if train.n_classes == 2 else train.n_classes
    if init is not None:
        _check_init(init, "logistic", train)
        weights = init.weights.copy()
        bias = init.bias.copy()
    else:
        weights = np.zeros((rows, train.n_features))
        bias = np.zeros(rows)

    X, y = train.features, train.labels
    for _ in range(cfg.epochs):
        model = LinearModel(weights, bias, "logistic", train.n_classes)
        grad_w, grad_b = logistic_gradient(model, X, y, cfg.l2)
        weights = weights - cfg.learning_rate * grad_w
        bias = bias - cfg.learning_rate * grad_b
    return LinearModel(weights, bias, "logistic", train.n_classes)


def hinge_objective(model: LinearModel, X: np.ndarray, y: np.ndarray, l2: float) -> float:
    """Mean multi-row hinge loss plus (l2 / 2) * ||W||^2, for monitoring."""
    signed = _signed_targets(y, model.n_classes)
    margins = X @ model.weights.T + model.bias
    hinge = np.maximum(0.0, 1.0 - signed * margins)
    return float(np.mean(hinge.sum(axis=1))) + 0.5 * l2 * float(np.sum(model.weights**2))


def _signed_targets(y: np.ndarray, n_classes: int) -> np.ndarray:
    """(n, rows) matrix of +/-1 targets, one column per weight row."""
    if n_classes == 2:
        return np.where(y == 1, 1.0, -1.0)[:, None]
    return np.where(y[:, None] == np.arange(n_classes)[None, :], 1.0, -1.0)


def train_svm(
    train: EncodedDataset, cfg: TrainConfig, init: LinearModel | None = None
) -> LinearModel:
    """Seeded per-sample subgradient descent on the regularized hinge loss.

    Epoch t uses learning rate ``learning_rate / t`` and a fresh sample
    permutation from the configured seed.  The weight decay factor is
    carried as a scalar and folded back once per epoch, which changes
    nothing semantically but keeps the inner loop cheap.
    """
    _check_train_inputs(train)
    rows = 1 if train.n_classes == 2 else train.n_classes
    if init is not None:
        _check_init(init, "svm", train)
        weights = init.weights.copy()
        bias = init.bias.copy()
    else:
        weights = np.zeros((rows, train.n_features))
        bias = np.zeros(rows)

    rng = np.random.default_rng(cfg.seed)
    signed = _signed_targets(train.labels, train.n_classes)
    X = np.ascontiguousarray(train.features)
    for epoch in range(1, cfg.epochs + 1):
        lr = cfg.learning_rate / epoch
        decay = 1.0 - lr * cfg.l2
        if decay <= 0.0:
            raise InvalidConfigError("learning_rate * l2 too large; weights would vanish")
        perm = rng.permutation(train.n_samples)
        scale = 1.0
        for i in perm:
            x = X[i]
            target = signed[i]
            margins = target * (scale * (weights @ x) + bias)
            scale *= decay
            violating = np.flatnonzero(margins < 1.0)
            if violating.size:
                step = (lr / scale) * target[violating]
                weights[violating] += step[:, None] * x
                bias[violating] += lr * target[violating]
        weights *= scale
    return LinearModel(weights, bias, "svm", train.n_classes)


def _gini(counts: np.ndarray, size) -> np.ndarray:
    ratios = counts / np.asarray(size, dtype=np.float64)
    return 1.0 - np.sum(ratios * ratios, axis=-1)


def _grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    rows: np.ndarray,
    depth: int,
    rng: np.random.Generator,
    n_classes: int,
    cfg: TrainConfig,
) -> TreeNode:
    counts = np.bincount(y[rows], minlength=n_classes)
    n = rows.shape[0]
    if depth >= cfg.max_depth or n < 2 * cfg.min_leaf or counts.max() == n:
        return TreeNode(class_counts=counts)

    d = X.shape[1]
    subset = rng.choice(d, size=math.ceil(math.sqrt(d)), replace=False)
    parent_gini = _gini(counts, n)
    sizes_left = np.arange(1, n)
    best_gain = 0.0
    best = None
    for f in subset:
        values = X[rows, f]
        order = np.argsort(values, kind="stable")
        sv = values[order]
        onehot = np.equal(y[rows][order, None], np.arange(n_classes)[None, :])
        boundary = sv[:-1] != sv[1:]
        valid = boundary & (sizes_left >= cfg.min_leaf) & ((n - sizes_left) >= cfg.min_leaf)
        if not valid.any():
            continue
        cum = np.cumsum(onehot, axis=0)[:-1][valid]
        nl = sizes_left[valid]
        nr = n - nl
        weighted = (nl * _gini(cum, nl[:, None]) + nr * _gini(counts - cum, nr[:, None])) / n
        gains = parent_gini - weighted
        k = int(np.argmax(gains))
        if gains[k] > best_gain:
            cut = int(nl[k]) - 1  # position in the sorted order
            lo, hi = sv[cut], sv[cut + 1]
            threshold = (lo + hi) / 2.0
            if not lo <= threshold < hi:  # adjacent floats can round the midpoint up
                threshold = lo
            best_gain = float(gains[k])
            best = (int(f), threshold)
    if best is None:
        return TreeNode(class_counts=counts)

    f, threshold = best
    go_left = X[rows, f] <= threshold
    left = _grow_tree(X, y, rows[go_left], depth + 1, rng, n_classes, cfg)
    right = _grow_tree(X, y, rows[~go_left], depth + 1, rng, n_classes, cfg)
    return TreeNode(feature_index=f, threshold=threshold, left=left, right=right)


def train_forest(train: EncodedDataset, cfg: TrainConfig) -> Forest:
    """Bagged CART trees; per-tree seeding makes tree order irrelevant."""
    _check_train_inputs(train)
    X = np.ascontiguousarray(train.features)
    y = train.labels
    n = train.n_samples
    trees = []
    for t in range(cfg.n_trees):
        rng = np.random.default_rng((cfg.seed, t))
        bootstrap = rng.integers(0, n, size=n)
        trees.append(_grow_tree(X, y, bootstrap, 0, rng, train.n_classes, cfg))
    return Forest(tuple(trees), train.n_classes, train.n_features)


def _route_tree(node: TreeNode, X: np.ndarray, idx: np.ndarray, out: np.ndarray) -> None:
    if node.is_leaf:
        counts = node.class_counts
        out[idx] = counts / counts.sum()
        return
    values = X[idx, node.feature_index]
    go_left = values <= node.threshold
    _route_tree(node.left, X, idx[go_left], out)
    _route_tree(node.right, X, idx[~go_left], out)


def predict_scores(model: Model, features: np.ndarray) -> np.ndarray:
    """(n, n_classes) score matrix; probabilities except for SVM margins."""
    X = np.asarray(features, dtype=np.float64)
    if X.ndim != 2:
        raise ShapeMismatchError(f"features must be 2-d, got shape {X.shape}")
    if isinstance(model, LinearModel):
        if X.shape[1] != model.n_features:
            raise ShapeMismatchError(
                f"model expects {model.n_features} features, got {X.shape[1]}"
            )
        z = X @ model.weights.T + model.bias
        if model.kind == "logistic":
            if model.n_classes == 2:
                p = _sigmoid(z[:, 0])
                return np.column_stack([1.0 - p, p])
            return _softmax(z)
        if model.n_classes == 2:
            return np.column_stack([-z[:, 0], z[:, 0]])
        return z
    if isinstance(model, Forest):
        if X.shape[1] != model.n_features:
            raise ShapeMismatchError(
                f"forest expects {model.n_features} features, got {X.shape[1]}"
            )
        total = np.zeros((X.shape[0], model.n_classes))
        scratch = np.empty_like(total)
        all_rows = np.arange(X.shape[0])
        for tree in model.trees:
            _route_tree(tree, X, all_rows, scratch)
            total += scratch
        return total / len(model.trees)
    raise ShapeMismatchError(f"unknown model type {type(model).__name__}")


def predict_labels(model: Model, features: np.ndarray) -> np.ndarray:
    """Argmax over predict_scores; ties resolve to the lowest class index."""
    return np.argmax(predict_scores(model, features), axis=1).astype(np.int64)
