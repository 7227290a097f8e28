"""Feature-ablation evaluation: one model per feature subset, same split.

Each model kind consumes the subset fields its architecture supports: the
forest uses everything (top-word counts, one-hots, numerics), the dense
network uses text plus categoricals, and the averaged-embedding softmax
model is text-only. Results come back sorted by AUC, best first.
"""

from __future__ import annotations

from dataclasses import dataclass

from .classifiers.densenet import DenseNetConfig, train_dense_net
from .classifiers.features import (CATEGORICAL_FIELDS, FEATURE_FIELDS, TEXT_FIELDS,
                                   assemble_text)
from .classifiers.forest import ForestConfig, train_random_forest
from .classifiers.softmax import SoftmaxTrainConfig, train_softmax_classifier
from .corpus import split_train_test
from .metrics import roc_auc
from .textprep import TextPrepConfig, normalize
from .vectors import EmbeddingConfig, train_embeddings

MODEL_KINDS = ("forest", "blazing", "dense")


@dataclass
class AblationRow:
    features: tuple[str, ...]
    auc: float

    def to_dict(self) -> dict:
        return {"features": list(self.features), "auc": float(self.auc)}


def _canonical_subset(subset) -> tuple[str, ...]:
    names = list(subset)
    if not names:
        raise ValueError("feature subsets must be non-empty")
    unknown = [n for n in names if n not in FEATURE_FIELDS]
    if unknown:
        raise ValueError(f"unknown feature name(s) {unknown}; known: {list(FEATURE_FIELDS)}")
    return tuple(f for f in FEATURE_FIELDS if f in set(names))


def feature_ablation(records, feature_subsets, model_kind: str = "forest",
                     seed: int = 0, label_mode: str = "ioq_only",
                     train_fraction: float = 0.8,
                     prep: TextPrepConfig | None = None,
                     forest_config: ForestConfig | None = None,
                     embedding_config: EmbeddingConfig | None = None) -> list[AblationRow]:
    """Train and score one model per feature subset under an identical split."""
    if model_kind not in MODEL_KINDS:
        raise ValueError(f"model_kind must be one of {MODEL_KINDS}")
    subsets = [_canonical_subset(s) for s in feature_subsets]
    prep = prep or TextPrepConfig()
    split = split_train_test(records, train_fraction, seed)
    labels = [r.throttle_label(label_mode) for r in split.test]

    rows: list[AblationRow] = []
    for subset in subsets:
        text_fields = tuple(f for f in subset if f in TEXT_FIELDS)
        cat_fields = tuple(f for f in subset if f in CATEGORICAL_FIELDS)
        if model_kind == "forest":
            cfg = forest_config or ForestConfig(n_trees=40, max_depth=12, top_words=300,
                                                seed=seed)
            model = train_random_forest(split.train, cfg, label_mode=label_mode,
                                        fields=subset)
        else:
            emb_cfg = embedding_config or EmbeddingConfig(dim=32, epochs=3, seed=seed)
            token_lists = [normalize(assemble_text(r, text_fields), prep, source_id=r.id)
                           for r in split.train]
            embedding = train_embeddings(token_lists, emb_cfg)
            if model_kind == "blazing":
                model = train_softmax_classifier(
                    split.train, embedding, SoftmaxTrainConfig(seed=seed),
                    label_mode=label_mode, prep=prep, text_fields=text_fields)
            else:
                model = train_dense_net(
                    split.train, embedding, DenseNetConfig(seed=seed),
                    label_mode=label_mode, prep=prep,
                    categorical_fields=cat_fields, text_fields=text_fields)
        scores = model.predict_proba(split.test)
        rows.append(AblationRow(features=subset, auc=roc_auc(scores, labels)))
    rows.sort(key=lambda r: (-r.auc, r.features))
    return rows


def ablation_table(rows: list[AblationRow]) -> str:
    lines = [f"{'AUC':>8}  Features", f"{'-' * 8}  {'-' * 40}"]
    for row in rows:
        lines.append(f"{row.auc:>8.4f}  {', '.join(row.features)}")
    return "\n".join(lines)
