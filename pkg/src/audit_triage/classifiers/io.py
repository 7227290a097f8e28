"""Self-describing JSON save/load for trained classifiers."""

from __future__ import annotations

import json
from pathlib import Path

from .densenet import DenseNetClassifier, densenet_from_dict, densenet_to_dict
from .forest import RandomForestModel, forest_from_dict, forest_to_dict
from .softmax import SoftmaxTextClassifier, softmax_from_dict, softmax_to_dict


def model_to_dict(model) -> dict:
    if isinstance(model, SoftmaxTextClassifier):
        return softmax_to_dict(model)
    if isinstance(model, DenseNetClassifier):
        return densenet_to_dict(model)
    if isinstance(model, RandomForestModel):
        return forest_to_dict(model)
    raise TypeError(f"cannot serialize model of type {type(model).__name__}")


def model_from_dict(raw: dict):
    kind = raw.get("kind")
    if kind == "softmax":
        return softmax_from_dict(raw)
    if kind == "dense":
        return densenet_from_dict(raw)
    if kind == "forest":
        return forest_from_dict(raw)
    raise ValueError(f"unknown model kind {kind!r}")


def save_model(model, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh)
        fh.write("\n")


def load_model(path):
    with open(Path(path), encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
