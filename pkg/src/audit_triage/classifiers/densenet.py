"""Small fully-connected network over document vectors plus one-hot categoricals.

Forward/backward passes are written out explicitly so gradients can be
checked against central finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np

from ..corpus import CheckRecord
from ..textprep import TextPrepConfig, normalize
from ..vectors import EmbeddingModel, doc_vectors
from .features import TEXT_FIELDS, assemble_text, prep_from_dict, prep_to_dict
from .softmax import softmax, _prepare_labels

DEFAULT_CATEGORICALS = ("asset_type", "vendor", "criticality")


@dataclass(frozen=True)
class DenseNetConfig:
    hidden: tuple[int, ...] = (128, 64, 32)
    activation: str = "relu"  # or "tanh"
    epochs: int = 20
    learning_rate: float = 0.1
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.activation not in ("relu", "tanh"):
            raise ValueError(f"unknown activation {self.activation!r}")
        if any(h < 1 for h in self.hidden):
            raise ValueError("hidden layer sizes must be positive")


@dataclass
class CategoryEncoder:
    """Per-field category -> one-hot column index."""

    fields: tuple[str, ...]
    columns: dict[str, dict[str, int]] = field(default_factory=dict)
    width: int = 0

    def fit(self, records) -> "CategoryEncoder":
        offset = 0
        self.columns = {}
        for name in self.fields:
            values = sorted({str(getattr(r, name) or "") for r in records})
            self.columns[name] = {v: offset + i for i, v in enumerate(values)}
            offset += len(values)
        self.width = offset
        return self

    def transform(self, records) -> np.ndarray:
        x = np.zeros((len(records), self.width))
        for row, r in enumerate(records):
            for name, columns in self.columns.items():
                col = columns.get(str(getattr(r, name) or ""))
                if col is not None:
                    x[row, col] = 1.0
        return x


class DenseNetClassifier:
    """Three dense layers, softmax head, trained by minibatch SGD."""

    kind = "dense"

    def __init__(self, embedding: EmbeddingModel, encoder: CategoryEncoder,
                 layers: list[tuple[np.ndarray, np.ndarray]],
                 config: DenseNetConfig, prep: TextPrepConfig, label_mode: str,
                 text_fields: tuple[str, ...] = TEXT_FIELDS,
                 text_center: np.ndarray | None = None, text_scale: float = 1.0):
        self.embedding = embedding
        self.encoder = encoder
        self.layers = layers  # [(W, b), ...] including the output layer
        self.config = config
        self.prep = prep
        self.label_mode = label_mode
        self.text_fields = tuple(text_fields)
        # standardizing the text block keeps it on the same footing as the
        # one-hot categoricals
        self.text_center = text_center
        self.text_scale = text_scale

    # -- feature assembly ---------------------------------------------------

    def _features(self, records) -> np.ndarray:
        token_lists = [normalize(assemble_text(r, self.text_fields), self.prep,
                               source_id=r.id) for r in records]
        text = doc_vectors(token_lists, self.embedding)
        if self.text_center is not None:
            text = (text - self.text_center) / self.text_scale
        cats = self.encoder.transform(records)
        return np.hstack([text, cats])

    # -- forward / backward -------------------------------------------------

    def _activate(self, z: np.ndarray) -> np.ndarray:
        return np.maximum(z, 0.0) if self.config.activation == "relu" else np.tanh(z)

    def _activate_grad(self, z: np.ndarray) -> np.ndarray:
        if self.config.activation == "relu":
            return (z > 0.0).astype(np.float64)
        return 1.0 - np.tanh(z) ** 2

    def _forward(self, x: np.ndarray):
        pre = []
        h = x
        for w, b in self.layers[:-1]:
            z = h @ w + b
            pre.append((h, z))
            h = self._activate(z)
        w_out, b_out = self.layers[-1]
        logits = h @ w_out + b_out
        return pre, h, logits

    def loss_and_grads(self, x: np.ndarray, y: np.ndarray, sample_weights: np.ndarray):
        """Weighted cross-entropy and its gradient w.r.t. every parameter."""
        pre, h_last, logits = self._forward(x)
        probs = softmax(logits)
        wsum = sample_weights.sum()
        eps = 1e-12
        loss = float(-np.sum(sample_weights * np.log(probs[np.arange(len(y)), y] + eps)) / wsum)

        onehot = np.zeros_like(probs)
        onehot[np.arange(len(y)), y] = 1.0
        delta = (probs - onehot) * sample_weights[:, None] / wsum

        grads: list[tuple[np.ndarray, np.ndarray]] = [None] * len(self.layers)  # type: ignore
        w_out, _ = self.layers[-1]
        grads[-1] = (h_last.T @ delta, delta.sum(axis=0))
        upstream = delta @ w_out.T
        for li in range(len(self.layers) - 2, -1, -1):
            h_in, z = pre[li]
            dz = upstream * self._activate_grad(z)
            grads[li] = (h_in.T @ dz, dz.sum(axis=0))
            if li > 0:
                upstream = dz @ self.layers[li][0].T
        return loss, grads

    # -- parameter vector helpers (used by gradient checks) ------------------

    def get_flat_params(self) -> np.ndarray:
        return np.concatenate([np.concatenate([w.ravel(), b.ravel()]) for w, b in self.layers])

    def set_flat_params(self, flat: np.ndarray) -> None:
        pos = 0
        rebuilt = []
        for w, b in self.layers:
            wn = w.size
            rebuilt_w = flat[pos:pos + wn].reshape(w.shape).copy()
            pos += wn
            rebuilt_b = flat[pos:pos + b.size].copy()
            pos += b.size
            rebuilt.append((rebuilt_w, rebuilt_b))
        self.layers = rebuilt

    @staticmethod
    def flatten_grads(grads) -> np.ndarray:
        return np.concatenate([np.concatenate([gw.ravel(), gb.ravel()]) for gw, gb in grads])

    # -- prediction -----------------------------------------------------------

    def predict_proba(self, records) -> np.ndarray:
        x = self._features(records)
        _, _, logits = self._forward(x)
        return softmax(logits)[:, 1]

    def predict_proba_one(self, record: CheckRecord) -> float:
        return float(self.predict_proba([record])[0])


def _init_layers(rng: np.random.Generator, sizes: list[int], activation: str):
    layers = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        if activation == "relu":
            scale = np.sqrt(2.0 / fan_in)
            w = rng.normal(0.0, scale, size=(fan_in, fan_out))
        else:
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            w = rng.uniform(-limit, limit, size=(fan_in, fan_out))
        layers.append((w, np.zeros(fan_out)))
    return layers


def train_dense_net(records, embedding: EmbeddingModel,
                    config: DenseNetConfig | None = None, sample_weights=None,
                    label_mode: str = "throttled",
                    prep: TextPrepConfig | None = None,
                    categorical_fields: tuple[str, ...] = DEFAULT_CATEGORICALS,
                    text_fields: tuple[str, ...] = TEXT_FIELDS) -> DenseNetClassifier:
    """Backprop training of the dense network; seed-deterministic."""
    cfg = config or DenseNetConfig()
    prep = prep or TextPrepConfig()
    y = _prepare_labels(records, label_mode)
    weights = (np.ones(len(records)) if sample_weights is None
               else np.asarray(sample_weights, dtype=np.float64))
    if weights.shape[0] != len(records):
        raise ValueError("one sample weight per record is required")

    encoder = CategoryEncoder(fields=categorical_fields).fit(records)
    rng = np.random.default_rng(cfg.seed)
    model = DenseNetClassifier(
        embedding=embedding, encoder=encoder,
        layers=_init_layers(rng, [embedding.dim + encoder.width, *cfg.hidden, 2], cfg.activation),
        config=cfg, prep=prep, label_mode=label_mode, text_fields=text_fields,
    )
    token_lists = [normalize(assemble_text(r, model.text_fields), prep, source_id=r.id)
                   for r in records]
    raw_text = doc_vectors(token_lists, embedding)
    model.text_center = raw_text.mean(axis=0)
    model.text_scale = float(np.linalg.norm(raw_text - model.text_center, axis=1).mean()) or 1.0
    x = model._features(records)
    n = x.shape[0]
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            loss, grads = model.loss_and_grads(x[idx], y[idx], weights[idx])
            if not np.isfinite(loss):
                raise ValueError(f"non-finite loss at epoch {epoch}")
            model.layers = [
                (w - cfg.learning_rate * gw, b - cfg.learning_rate * gb)
                for (w, b), (gw, gb) in zip(model.layers, grads)
            ]
    return model


def densenet_to_dict(model: DenseNetClassifier) -> dict:
    from ..vectors import embedding_to_dict
    return {
        "kind": model.kind,
        "label_mode": model.label_mode,
        "text_fields": list(model.text_fields),
        "config": asdict(model.config),
        "prep": prep_to_dict(model.prep),
        "encoder": {"fields": list(model.encoder.fields),
                    "columns": model.encoder.columns, "width": model.encoder.width},
        "text_center": None if model.text_center is None
        else [float(v) for v in model.text_center],
        "text_scale": float(model.text_scale),
        "layers": [
            {"w": [[float(v) for v in row] for row in w], "b": [float(v) for v in b]}
            for w, b in model.layers
        ],
        "embedding": embedding_to_dict(model.embedding),
    }


def densenet_from_dict(raw: dict) -> DenseNetClassifier:
    from ..vectors import embedding_from_dict
    encoder = CategoryEncoder(fields=tuple(raw["encoder"]["fields"]))
    encoder.columns = {k: {v: int(c) for v, c in cols.items()}
                       for k, cols in raw["encoder"]["columns"].items()}
    encoder.width = int(raw["encoder"]["width"])
    cfg_raw = dict(raw["config"])
    cfg_raw["hidden"] = tuple(cfg_raw["hidden"])
    return DenseNetClassifier(
        embedding=embedding_from_dict(raw["embedding"]),
        encoder=encoder,
        layers=[(np.array(l["w"], dtype=np.float64), np.array(l["b"], dtype=np.float64))
                for l in raw["layers"]],
        config=DenseNetConfig(**cfg_raw),
        prep=prep_from_dict(raw["prep"]),
        label_mode=raw["label_mode"],
        text_fields=tuple(raw.get("text_fields", TEXT_FIELDS)),
        text_center=None if raw.get("text_center") is None
        else np.array(raw["text_center"], dtype=np.float64),
        text_scale=float(raw.get("text_scale", 1.0)),
    )
