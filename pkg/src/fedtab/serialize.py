"""JSON round-trip serialization for trained models.

Floats are stored with full repr precision, so save followed by load
reproduces parameters bit for bit.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import FedtabError
from .models import Forest, LinearModel, Model, TreeNode

FORMAT_VERSION = 1


class ModelFormatError(FedtabError):
    """The model file is malformed or from an unknown format version."""


def _node_to_dict(node: TreeNode) -> dict:
    if node.is_leaf:
        return {"counts": [int(c) for c in node.class_counts]}
    return {
        "feature": node.feature_index,
        "threshold": node.threshold,
        "left": _node_to_dict(node.left),
        "right": _node_to_dict(node.right),
    }


def _node_from_dict(payload: dict, n_classes: int) -> TreeNode:
    if "counts" in payload:
        counts = np.asarray(payload["counts"], dtype=np.int64)
        if counts.shape != (n_classes,):
            raise ModelFormatError(f"leaf counts have shape {counts.shape}")
        return TreeNode(class_counts=counts)
    try:
        return TreeNode(
            feature_index=int(payload["feature"]),
            threshold=float(payload["threshold"]),
            left=_node_from_dict(payload["left"], n_classes),
            right=_node_from_dict(payload["right"], n_classes),
        )
    except KeyError as missing:
        raise ModelFormatError(f"tree node missing field {missing}") from None


def model_to_dict(model: Model) -> dict:
    if isinstance(model, LinearModel):
        return {
            "format_version": FORMAT_VERSION,
            "model": "linear",
            "kind": model.kind,
            "n_classes": model.n_classes,
            "weights": model.weights.tolist(),
            "bias": model.bias.tolist(),
        }
    if isinstance(model, Forest):
        return {
            "format_version": FORMAT_VERSION,
            "model": "forest",
            "n_classes": model.n_classes,
            "n_features": model.n_features,
            "trees": [_node_to_dict(t) for t in model.trees],
        }
    raise ModelFormatError(f"cannot serialize {type(model).__name__}")


def model_from_dict(payload: dict) -> Model:
    if not isinstance(payload, dict):
        raise ModelFormatError("model payload must be an object")
    if payload.get("format_version") != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported format_version {payload.get('format_version')!r}")
    family = payload.get("model")
    try:
        if family == "linear":
            return LinearModel(
                weights=np.asarray(payload["weights"], dtype=np.float64),
                bias=np.asarray(payload["bias"], dtype=np.float64),
                kind=payload["kind"],
                n_classes=int(payload["n_classes"]),
            )
        if family == "forest":
            n_classes = int(payload["n_classes"])
            return Forest(
                trees=tuple(_node_from_dict(t, n_classes) for t in payload["trees"]),
                n_classes=n_classes,
                n_features=int(payload["n_features"]),
            )
    except KeyError as missing:
        raise ModelFormatError(f"model payload missing field {missing}") from None
    raise ModelFormatError(f"unknown model family {family!r}")


def dumps(model: Model) -> str:
    return json.dumps(model_to_dict(model), sort_keys=True)


def loads(text: str) -> Model:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as err:
        raise ModelFormatError(f"invalid JSON: {err}") from None
    return model_from_dict(payload)


def save_model(model: Model, path: str | Path) -> None:
    Path(path).write_text(dumps(model) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> Model:
    return loads(Path(path).read_text(encoding="utf-8"))
