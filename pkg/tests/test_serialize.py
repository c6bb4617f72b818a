"""Model persistence: bit-exact round trips and format validation."""

from __future__ import annotations

import numpy as np
import pytest

from _synth import blob_dataset
from fedtab.models import LinearModel, TrainConfig, predict_scores, train_forest, train_svm
from fedtab.serialize import (
    ModelFormatError,
    dumps,
    load_model,
    loads,
    model_to_dict,
    save_model,
)


def test_linear_round_trip_is_bit_exact():
    rng = np.random.default_rng(1)
    for kind in ("logistic", "svm"):
        for n_classes, rows in ((2, 1), (3, 3)):
            model = LinearModel(rng.normal(0, 3, (rows, 7)), rng.normal(0, 3, rows), kind, n_classes)
            back = loads(dumps(model))
            assert isinstance(back, LinearModel)
            assert back.kind == kind and back.n_classes == n_classes
            assert np.array_equal(back.weights, model.weights)
            assert np.array_equal(back.bias, model.bias)


def test_forest_round_trip_preserves_predictions():
    data = blob_dataset(40, n_classes=3, seed=2)
    forest = train_forest(data, TrainConfig(n_trees=6, max_depth=5, seed=4))
    back = loads(dumps(forest))
    assert dumps(back) == dumps(forest)
    assert np.array_equal(predict_scores(back, data.features), predict_scores(forest, data.features))


def test_save_and_load_files(tmp_path):
    data = blob_dataset(20, n_classes=2, seed=5)
    model = train_svm(data, TrainConfig(learning_rate=0.05, epochs=5, seed=1))
    path = tmp_path / "model.json"
    save_model(model, path)
    back = load_model(path)
    assert np.array_equal(back.weights, model.weights)
    assert np.array_equal(back.bias, model.bias)


def test_rejects_malformed_payloads():
    with pytest.raises(ModelFormatError):
        loads("not json at all {")
    with pytest.raises(ModelFormatError):
        loads('{"format_version": 99, "model": "linear"}')
    with pytest.raises(ModelFormatError):
        loads('{"format_version": 1, "model": "spline"}')
    good = model_to_dict(
        LinearModel(np.zeros((1, 2)), np.zeros(1), "logistic", 2)
    )
    del good["weights"]
    import json

    with pytest.raises(ModelFormatError):
        loads(json.dumps(good))
