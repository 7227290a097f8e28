"""Linear softmax classifier over averaged word embeddings."""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np

from ..corpus import CheckRecord
from ..errors import ModelNotFittedError
from ..textprep import TextPrepConfig, normalize
from ..vectors import EmbeddingModel, doc_vectors
from .features import TEXT_FIELDS, assemble_text, prep_from_dict, prep_to_dict

CLASSES = ("fail", "pass")


def softmax(z) -> np.ndarray:
    """Probabilities proportional to exp(z), computed max-shifted.

    Accepts a single vector or a batch with classes on the last axis.
    """
    z = np.asarray(z, dtype=np.float64)
    if not np.all(np.isfinite(z)):
        raise ValueError("softmax input must be finite")
    shifted = z - np.max(z, axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / np.sum(exp, axis=-1, keepdims=True)


@dataclass(frozen=True)
class SoftmaxTrainConfig:
    epochs: int = 30
    learning_rate: float = 0.5
    batch_size: int = 64
    seed: int = 0


@dataclass
class SoftmaxTextClassifier:
    """weights @ (doc_vector - center) + bias, squashed to probabilities.

    Centering by the training-mean document vector removes the large
    shared component that averaged embeddings carry, which would
    otherwise drown the class signal for the linear layer.
    """

    embedding: EmbeddingModel
    weights: np.ndarray                  # (2, dim)
    bias: np.ndarray                     # (2,)
    center: np.ndarray | None = None     # (dim,) training-mean doc vector
    scale: float = 1.0                   # mean centered norm, for conditioning
    prep: TextPrepConfig = field(default_factory=TextPrepConfig)
    train_config: SoftmaxTrainConfig = field(default_factory=SoftmaxTrainConfig)
    label_mode: str = "throttled"
    text_fields: tuple[str, ...] = TEXT_FIELDS
    kind: str = "softmax"

    def record_vector(self, record: CheckRecord) -> np.ndarray:
        tokens = normalize(assemble_text(record, self.text_fields), self.prep)
        idxs = [self.embedding.vocab.index[t] for t in tokens if t in self.embedding.vocab.index]
        if not idxs:
            return np.zeros(self.embedding.dim)
        return self.embedding.matrix[idxs].mean(axis=0)

    def predict_proba(self, records) -> np.ndarray:
        """Pass probability for each record."""
        x = np.stack([self.record_vector(r) for r in records])
        if self.center is not None:
            x = (x - self.center) / self.scale
        logits = x @ self.weights.T + self.bias
        return softmax(logits)[:, 1]

    def predict_proba_one(self, record: CheckRecord) -> float:
        return float(self.predict_proba([record])[0])


def _prepare_labels(records, label_mode: str) -> np.ndarray:
    y = np.array([1 if r.throttle_label(label_mode) == "pass" else 0 for r in records],
                 dtype=np.int64)
    if y.min() == y.max():
        raise ValueError("training set contains a single class")
    return y


def _sgd_softmax(x: np.ndarray, y: np.ndarray, sample_weights: np.ndarray,
                 cfg: SoftmaxTrainConfig) -> tuple[np.ndarray, np.ndarray]:
    n, dim = x.shape
    w = np.zeros((2, dim))
    b = np.zeros(2)
    onehot = np.zeros((n, 2))
    onehot[np.arange(n), y] = 1.0
    rng = np.random.default_rng(cfg.seed)
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            xb, yb, wb = x[idx], onehot[idx], sample_weights[idx]
            probs = softmax(xb @ w.T + b)
            if not np.all(np.isfinite(probs)):
                raise ValueError(f"non-finite loss at epoch {epoch}")
            err = (probs - yb) * wb[:, None] / wb.sum()
            w -= cfg.learning_rate * err.T @ xb
            b -= cfg.learning_rate * err.sum(axis=0)
    return w, b


def train_softmax_classifier(records, embedding: EmbeddingModel,
                             config: SoftmaxTrainConfig | None = None,
                             sample_weights=None, label_mode: str = "throttled",
                             prep: TextPrepConfig | None = None,
                             text_fields: tuple[str, ...] = TEXT_FIELDS) -> SoftmaxTextClassifier:
    """Fit the linear layer by weighted cross-entropy SGD; seed-deterministic."""
    cfg = config or SoftmaxTrainConfig()
    prep = prep or TextPrepConfig()
    y = _prepare_labels(records, label_mode)
    token_lists = [normalize(assemble_text(r, text_fields), prep, source_id=r.id)
                   for r in records]
    x = doc_vectors(token_lists, embedding)
    weights = (np.ones(len(records)) if sample_weights is None
               else np.asarray(sample_weights, dtype=np.float64))
    if weights.shape[0] != len(records):
        raise ValueError("one sample weight per record is required")
    center = x.mean(axis=0)
    norms = np.linalg.norm(x - center, axis=1)
    scale = float(norms.mean()) or 1.0
    w, b = _sgd_softmax((x - center) / scale, y, weights, cfg)
    return SoftmaxTextClassifier(embedding=embedding, weights=w, bias=b, center=center,
                                 scale=scale, prep=prep, train_config=cfg,
                                 label_mode=label_mode, text_fields=tuple(text_fields))


def softmax_to_dict(model: SoftmaxTextClassifier) -> dict:
    from ..vectors import embedding_to_dict
    return {
        "kind": model.kind,
        "label_mode": model.label_mode,
        "text_fields": list(model.text_fields),
        "train_config": asdict(model.train_config),
        "prep": prep_to_dict(model.prep),
        "weights": [[float(v) for v in row] for row in model.weights],
        "bias": [float(v) for v in model.bias],
        "center": None if model.center is None else [float(v) for v in model.center],
        "scale": float(model.scale),
        "embedding": embedding_to_dict(model.embedding),
    }


def softmax_from_dict(raw: dict) -> SoftmaxTextClassifier:
    from ..vectors import embedding_from_dict
    return SoftmaxTextClassifier(
        embedding=embedding_from_dict(raw["embedding"]),
        weights=np.array(raw["weights"], dtype=np.float64),
        bias=np.array(raw["bias"], dtype=np.float64),
        center=None if raw.get("center") is None else np.array(raw["center"], dtype=np.float64),
        scale=float(raw.get("scale", 1.0)),
        prep=prep_from_dict(raw["prep"]),
        train_config=SoftmaxTrainConfig(**raw["train_config"]),
        label_mode=raw["label_mode"],
        text_fields=tuple(raw.get("text_fields", TEXT_FIELDS)),
    )
