"""Federated averaging over the classifiers in models.py.

One round: every client trains locally from the current global parameters,
then the server combines the results.  Linear models are averaged entry by
entry, weighted by client training-set size; forests are combined by tree
union, replacing the previous global forest entirely.  Each entry of the
average is accumulated with math.fsum, so the result is exact for the given
weights and therefore independent of client order.

Poisoned clients flip a share of their local training labels once, before
round one; evaluation labels are never altered.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .attack import AttackConfig, flip_labels
from .dataset import ClientPartition, EncodedDataset, concat_datasets
from .errors import EmptyInputError, InvalidConfigError, ShapeMismatchError
from .metrics import MetricsReport, accuracy, compute_report
from .models import (
    Forest,
    LinearModel,
    Model,
    TrainConfig,
    predict_labels,
    predict_scores,
    train_forest,
    train_logreg,
    train_svm,
)


@dataclass(frozen=True)
class FederationConfig:
    model_kind: str
    rounds: int
    local_epochs: int
    train_cfg: TrainConfig
    n_clients: int = 3
    seed: int = 0

    def __post_init__(self) -> None:
        if self.model_kind not in ("logistic", "svm", "forest"):
            raise InvalidConfigError(f"unknown model_kind {self.model_kind!r}")
        if self.rounds < 1:
            raise InvalidConfigError(f"rounds must be at least 1, got {self.rounds}")
        if self.local_epochs < 1:
            raise InvalidConfigError(f"local_epochs must be at least 1, got {self.local_epochs}")
        if self.n_clients < 1:
            raise InvalidConfigError(f"n_clients must be at least 1, got {self.n_clients}")


@dataclass(frozen=True)
class RoundRecord:
    """Server-side log entry for one completed round."""

    round_index: int
    train_counts: tuple[int, ...]
    local_train_accuracy: tuple[float, ...]
    global_metrics: MetricsReport


@dataclass
class RoundLog:
    """Per-round records plus the flip masks applied before round one."""

    records: list[RoundRecord] = field(default_factory=list)
    flip_masks: dict[int, np.ndarray] = field(default_factory=dict)


def aggregate_parametric(models: list[LinearModel], counts: list[int]) -> LinearModel:
    """Sample-count-weighted average of linear models, exact per entry.

    Weights are counts / total.  Each output entry is a single fsum over the
    weighted client entries, so client order cannot change the result and a
    single-model aggregate returns that model's parameters bit for bit.
    """
    if not models:
        raise EmptyInputError("no models to aggregate")
    if len(counts) != len(models):
        raise ShapeMismatchError(f"{len(models)} models but {len(counts)} counts")
    if any(c <= 0 for c in counts):
        raise InvalidConfigError(f"client counts must be positive, got {counts}")
    head = models[0]
    for m in models[1:]:
        if m.kind != head.kind or m.n_classes != head.n_classes:
            raise ShapeMismatchError("models disagree on kind or class count")
        if m.weights.shape != head.weights.shape:
            raise ShapeMismatchError("models disagree on weight shape")
    if len(models) == 1:
        return LinearModel(head.weights.copy(), head.bias.copy(), head.kind, head.n_classes)

    total = sum(counts)
    shares = [c / total for c in counts]
    stacked_w = np.stack([m.weights.reshape(-1) * s for m, s in zip(models, shares)])
    stacked_b = np.stack([m.bias * s for m, s in zip(models, shares)])
    weights = np.array([math.fsum(stacked_w[:, j]) for j in range(stacked_w.shape[1])])
    bias = np.array([math.fsum(stacked_b[:, j]) for j in range(stacked_b.shape[1])])
    return LinearModel(
        weights.reshape(head.weights.shape), bias, head.kind, head.n_classes
    )


def aggregate_forests(forests: list[Forest]) -> Forest:
    """Union of all client trees; replaces any previous global forest."""
    if not forests:
        raise EmptyInputError("no forests to aggregate")
    head = forests[0]
    for f in forests[1:]:
        if f.n_classes != head.n_classes or f.n_features != head.n_features:
            raise ShapeMismatchError("forests disagree on dimensions")
    trees = tuple(t for f in forests for t in f.trees)
    return Forest(trees, head.n_classes, head.n_features)


def evaluate_global(model: Model, partitions: list[ClientPartition]) -> MetricsReport:
    """Evaluate one model on the pooled, untouched client test sets."""
    if not partitions:
        raise EmptyInputError("no partitions to evaluate on")
    pooled = concat_datasets([p.test for p in partitions])
    scores = predict_scores(model, pooled.features)
    pred = predict_labels(model, pooled.features)
    return compute_report(pred, pooled.labels, scores, pooled.n_classes)


def _client_train_cfg(cfg: FederationConfig, client_id: int) -> TrainConfig:
    return replace(cfg.train_cfg, seed=cfg.seed ^ client_id, epochs=cfg.local_epochs)


def run_federated(
    partitions: list[ClientPartition],
    cfg: FederationConfig,
    attack: AttackConfig | None = None,
) -> tuple[Model, RoundLog]:
    """Run the configured number of rounds and return (global model, log).

    Per-client derived seeds (train seed = cfg.seed XOR client id, flip seed
    = attack seed XOR client id) keep clients decorrelated but reproducible.
    Forest clients retrain identically every round because their data and
    seed never change, so their local forests are built once and reused; the
    global forest is still re-formed each round.
    """
    if len(partitions) != cfg.n_clients:
        raise InvalidConfigError(
            f"config expects {cfg.n_clients} clients, got {len(partitions)} partitions"
        )

    log = RoundLog()
    train_labels: dict[int, np.ndarray] = {}
    for p in partitions:
        labels = p.train.labels
        if attack is not None and p.client_id in attack.malicious_clients:
            flip_cfg = replace(attack, seed=attack.seed ^ p.client_id)
            labels, mask = flip_labels(labels, p.train.n_classes, flip_cfg)
            log.flip_masks[p.client_id] = mask
        train_labels[p.client_id] = labels

    def client_dataset(p: ClientPartition) -> EncodedDataset:
        labels = train_labels[p.client_id]
        if labels is p.train.labels:
            return p.train
        return EncodedDataset(p.train.features, labels, p.train.n_classes, p.train.feature_names)

    global_model: Model | None = None
    forest_cache: dict[int, Forest] = {}
    counts = [p.train.n_samples for p in partitions]
    for round_index in range(1, cfg.rounds + 1):
        locals_: list[Model] = []
        local_acc = []
        for p in partitions:
            data = client_dataset(p)
            client_cfg = _client_train_cfg(cfg, p.client_id)
            if cfg.model_kind == "forest":
                if p.client_id not in forest_cache:
                    forest_cache[p.client_id] = train_forest(data, client_cfg)
                local = forest_cache[p.client_id]
            elif cfg.model_kind == "logistic":
                local = train_logreg(data, client_cfg, init=global_model)
            else:
                local = train_svm(data, client_cfg, init=global_model)
            locals_.append(local)
            local_acc.append(accuracy(predict_labels(local, data.features), data.labels))

        if cfg.model_kind == "forest":
            global_model = aggregate_forests(locals_)
        else:
            global_model = aggregate_parametric(locals_, counts)
        log.records.append(
            RoundRecord(
                round_index=round_index,
                train_counts=tuple(counts),
                local_train_accuracy=tuple(local_acc),
                global_metrics=evaluate_global(global_model, partitions),
            )
        )
    return global_model, log
