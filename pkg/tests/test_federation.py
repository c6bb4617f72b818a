"""Federated averaging: aggregation algebra, round loops, poisoning wiring."""

from __future__ import annotations

import numpy as np
import pytest

from _oracles import exact_weighted_average
from _synth import grades_dataset_spec, write_grades_csv
from fedtab.attack import AttackConfig, flip_count
from fedtab.dataset import build_client_partitions, concat_datasets
from fedtab.errors import EmptyInputError, InvalidConfigError, ShapeMismatchError
from fedtab.federation import (
    FederationConfig,
    aggregate_forests,
    aggregate_parametric,
    evaluate_global,
    run_federated,
)
from fedtab.metrics import compute_report
from fedtab.models import (
    Forest,
    LinearModel,
    TrainConfig,
    predict_labels,
    predict_scores,
    train_forest,
    train_logreg,
)
from fedtab.schemas import load_dataset


def linear(values, bias, kind="logistic", n_classes=2):
    return LinearModel(np.asarray(values, dtype=np.float64), np.asarray(bias, dtype=np.float64), kind, n_classes)


@pytest.fixture(scope="module")
def partitions(tmp_path_factory):
    path = write_grades_csv(tmp_path_factory.mktemp("fed") / "grades.csv", n=300, seed=21)
    raw = load_dataset(grades_dataset_spec(path))
    schema = grades_dataset_spec(path).schema
    return build_client_partitions(raw, schema, 3, 0.2, seed=2, stats_scope="client")


def test_aggregate_hand_value():
    a = linear([[1.0, 2.0]], [0.0])
    b = linear([[3.0, -2.0]], [4.0])
    out = aggregate_parametric([a, b], [1, 3])
    assert out.weights == pytest.approx(np.array([[2.5, -1.0]]), abs=1e-15)
    assert out.bias == pytest.approx(np.array([3.0]), abs=1e-15)


def test_aggregate_is_permutation_invariant_bitwise():
    rng = np.random.default_rng(3)
    models = [linear(rng.normal(0, 1, (1, 6)), rng.normal(0, 1, 1)) for _ in range(5)]
    counts = [3, 17, 5, 9, 1]
    base = aggregate_parametric(models, counts)
    for seed in range(5):
        order = np.random.default_rng(seed).permutation(5)
        shuffled = aggregate_parametric([models[i] for i in order], [counts[i] for i in order])
        assert np.array_equal(base.weights, shuffled.weights)
        assert np.array_equal(base.bias, shuffled.bias)


def test_aggregate_matches_exact_rational_oracle():
    rng = np.random.default_rng(11)
    for _ in range(50):
        k = int(rng.integers(1, 6))
        models = [
            linear(rng.normal(0, 2, (3, 4)), rng.normal(0, 2, 3), n_classes=3)
            for _ in range(k)
        ]
        counts = [int(c) for c in rng.integers(1, 50, k)]
        out = aggregate_parametric(models, counts)
        expected = exact_weighted_average(
            [m.weights.reshape(-1).tolist() for m in models], counts
        )
        assert out.weights.reshape(-1) == pytest.approx(expected, abs=1e-12)


def test_aggregate_single_model_is_bit_identical():
    model = linear([[0.1, 0.2, 0.3]], [0.7])
    out = aggregate_parametric([model], [41])
    assert np.array_equal(out.weights, model.weights)
    assert np.array_equal(out.bias, model.bias)
    assert out is not model


def test_aggregate_of_identical_models_is_idempotent():
    model = linear([[0.1, -0.7, 2.4]], [1.3])
    out = aggregate_parametric([model, model, model], [5, 5, 5])
    assert out.weights == pytest.approx(model.weights, abs=1e-12)
    assert out.bias == pytest.approx(model.bias, abs=1e-12)


def test_aggregate_rejects_bad_inputs():
    model = linear([[1.0]], [0.0])
    with pytest.raises(EmptyInputError):
        aggregate_parametric([], [])
    with pytest.raises(ShapeMismatchError):
        aggregate_parametric([model, model], [1])
    with pytest.raises(ShapeMismatchError):
        aggregate_parametric([model, linear([[1.0, 2.0]], [0.0])], [1, 1])
    with pytest.raises(ShapeMismatchError):
        aggregate_parametric([model, linear([[1.0]], [0.0], kind="svm")], [1, 1])
    with pytest.raises(InvalidConfigError):
        aggregate_parametric([model, model], [1, 0])


def test_aggregate_forests_unions_trees(partitions):
    cfg = TrainConfig(n_trees=3, max_depth=4, seed=1)
    forests = [train_forest(p.train, cfg) for p in partitions]
    union = aggregate_forests(forests)
    assert len(union.trees) == 9
    assert union.trees[:3] == forests[0].trees
    with pytest.raises(EmptyInputError):
        aggregate_forests([])
    other = Forest(forests[0].trees, forests[0].n_classes + 1, forests[0].n_features)
    with pytest.raises(ShapeMismatchError):
        aggregate_forests([forests[0], other])


def test_evaluate_global_matches_manual_concat(partitions):
    model = train_logreg(partitions[0].train, TrainConfig(learning_rate=0.1, epochs=50, l2=1e-3))
    report = evaluate_global(model, partitions)
    pooled = concat_datasets([p.test for p in partitions])
    manual = compute_report(
        predict_labels(model, pooled.features),
        pooled.labels,
        predict_scores(model, pooled.features),
        pooled.n_classes,
    )
    assert report == manual
    assert report.n_samples == sum(p.test.n_samples for p in partitions)


def _fed_cfg(model_kind, rounds, local_epochs, seed=4, n_clients=3, **train_kwargs):
    defaults = dict(learning_rate=0.1, epochs=300, l2=1e-3)
    if model_kind == "forest":
        defaults = dict(n_trees=5, max_depth=6, min_leaf=2)
    defaults.update(train_kwargs)
    return FederationConfig(
        model_kind=model_kind,
        rounds=rounds,
        local_epochs=local_epochs,
        train_cfg=TrainConfig(**defaults),
        n_clients=n_clients,
        seed=seed,
    )


def test_run_federated_logs_every_round(partitions):
    model, log = run_federated(partitions, _fed_cfg("logistic", rounds=3, local_epochs=20))
    assert [r.round_index for r in log.records] == [1, 2, 3]
    for record in log.records:
        assert record.train_counts == tuple(p.train.n_samples for p in partitions)
        assert len(record.local_train_accuracy) == 3
        assert all(0.0 <= a <= 100.0 for a in record.local_train_accuracy)
    assert isinstance(model, LinearModel)
    assert log.flip_masks == {}


def test_run_federated_improves_over_rounds(partitions):
    _, log = run_federated(partitions, _fed_cfg("logistic", rounds=6, local_epochs=50))
    assert log.records[-1].global_metrics.accuracy_pct >= 80.0


def test_run_federated_is_deterministic(partitions):
    cfg = _fed_cfg("svm", rounds=2, local_epochs=10, learning_rate=0.05)
    a, _ = run_federated(partitions, cfg)
    b, _ = run_federated(partitions, cfg)
    assert np.array_equal(a.weights, b.weights)
    assert np.array_equal(a.bias, b.bias)


def test_forest_rounds_only_extend_the_log(partitions):
    cfg = _fed_cfg("forest", rounds=3, local_epochs=1)
    model, log = run_federated(partitions, cfg)
    assert isinstance(model, Forest)
    assert len(model.trees) == 15  # 3 clients x 5 trees, replaced each round
    first = log.records[0].global_metrics
    for record in log.records[1:]:
        assert record.global_metrics == first


def test_single_client_logistic_equals_centralized_chain(partitions):
    solo = [partitions[0]]
    cfg = _fed_cfg("logistic", rounds=4, local_epochs=25, seed=8, n_clients=1)
    fed_model, _ = run_federated(solo, cfg)
    central = train_logreg(
        partitions[0].train, TrainConfig(learning_rate=0.1, epochs=100, l2=1e-3, seed=8)
    )
    assert np.array_equal(fed_model.weights, central.weights)
    assert np.array_equal(fed_model.bias, central.bias)


def test_poisoned_run_flips_only_malicious_clients(partitions):
    attack = AttackConfig(flip_fraction=0.5, malicious_clients=frozenset({0}), seed=6)
    before = [p.train.labels.copy() for p in partitions]
    _, log = run_federated(partitions, _fed_cfg("logistic", rounds=2, local_epochs=10), attack)
    assert set(log.flip_masks) == {0}
    mask = log.flip_masks[0]
    assert int(mask.sum()) == flip_count(partitions[0].train.n_samples, 0.5)
    # inputs must not be mutated: the attack works on a copy
    for p, labels in zip(partitions, before):
        assert np.array_equal(p.train.labels, labels)


def test_poisoning_changes_the_model(partitions):
    clean, _ = run_federated(partitions, _fed_cfg("logistic", rounds=2, local_epochs=20))
    attack = AttackConfig(flip_fraction=0.5, malicious_clients=frozenset({0}), seed=6)
    poisoned, _ = run_federated(partitions, _fed_cfg("logistic", rounds=2, local_epochs=20), attack)
    assert not np.array_equal(clean.weights, poisoned.weights)


def test_run_federated_validates_client_count(partitions):
    with pytest.raises(InvalidConfigError):
        run_federated(partitions[:2], _fed_cfg("logistic", rounds=1, local_epochs=1))
