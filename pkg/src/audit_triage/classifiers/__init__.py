"""The three text classifiers plus class rebalancing."""

from __future__ import annotations

import numpy as np

from ..corpus import CheckRecord
from ..errors import ModelNotFittedError
from .densenet import DenseNetClassifier, DenseNetConfig, train_dense_net
from .features import TopWordFeaturizer, FEATURE_FIELDS, DEFAULT_FIELDS
from .forest import ForestConfig, RandomForestModel, train_random_forest
from .io import load_model, model_from_dict, model_to_dict, save_model
from .rebalance import RebalanceSpec, rebalance, rebalance_indices
from .softmax import (SoftmaxTextClassifier, SoftmaxTrainConfig, softmax,
                      train_softmax_classifier)

__all__ = [
    "CheckRecord", "DenseNetClassifier", "DenseNetConfig", "ForestConfig",
    "RandomForestModel", "RebalanceSpec", "SoftmaxTextClassifier",
    "SoftmaxTrainConfig", "TopWordFeaturizer", "FEATURE_FIELDS", "DEFAULT_FIELDS",
    "load_model", "model_from_dict", "model_to_dict", "predict_proba", "rebalance",
    "rebalance_indices", "save_model", "softmax", "train_dense_net",
    "train_random_forest", "train_softmax_classifier",
]


def predict_proba(model, record: CheckRecord) -> float:
    """Probability that a check passes, from any trained classifier."""
    if model is None:
        raise ModelNotFittedError("no trained model supplied")
    p = model.predict_proba_one(record)
    return float(np.clip(p, 0.0, 1.0))
