"""Count-matrix feature extraction shared by the forest and dense models.

Text fields contribute columns for their most frequent tokens, categorical
fields contribute one-hot columns, numeric fields pass through (missing
values become 0). Fitted on training records; unseen categories and tokens
simply produce zero columns at transform time.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from ..textprep import TextPrepConfig, normalize

TEXT_FIELDS = ("checklist_text", "focus_points")
CATEGORICAL_FIELDS = ("asset_type", "vendor", "site", "criticality", "severity_group")
NUMERIC_FIELDS = ("severity_score",)
FEATURE_FIELDS = TEXT_FIELDS + CATEGORICAL_FIELDS + NUMERIC_FIELDS

DEFAULT_FIELDS = ("checklist_text", "focus_points", "asset_type", "vendor", "criticality")


def _field_value(record, name: str):
    value = getattr(record, name)
    return "" if value is None else value


def assemble_text(record, fields=TEXT_FIELDS) -> str:
    """Concatenate the chosen free-text fields of a record."""
    return " ".join(str(_field_value(record, f)) for f in fields).strip()


@dataclass
class TopWordFeaturizer:
    """Top-token count columns per text field plus one-hot categoricals."""

    fields: tuple[str, ...] = DEFAULT_FIELDS
    top_words: int = 1000
    prep: TextPrepConfig = field(default_factory=TextPrepConfig)
    token_columns: dict[str, dict[str, int]] = field(default_factory=dict)
    category_columns: dict[str, dict[str, int]] = field(default_factory=dict)
    numeric_columns: list[str] = field(default_factory=list)
    n_features: int = 0

    def __post_init__(self):
        unknown = [f for f in self.fields if f not in FEATURE_FIELDS]
        if unknown:
            raise ValueError(f"unknown feature field(s) {unknown}; known: {list(FEATURE_FIELDS)}")
        if not self.fields:
            raise ValueError("at least one feature field is required")

    def fit(self, records) -> "TopWordFeaturizer":
        offset = 0
        self.token_columns = {}
        self.category_columns = {}
        self.numeric_columns = []
        for name in self.fields:
            if name in TEXT_FIELDS:
                freq: Counter = Counter()
                for r in records:
                    freq.update(normalize(_field_value(r, name), self.prep).tokens)
                top = sorted(freq, key=lambda t: (-freq[t], t))[: self.top_words]
                self.token_columns[name] = {t: offset + i for i, t in enumerate(top)}
                offset += len(top)
            elif name in CATEGORICAL_FIELDS:
                values = sorted({str(_field_value(r, name)) for r in records})
                self.category_columns[name] = {v: offset + i for i, v in enumerate(values)}
                offset += len(values)
            else:
                self.numeric_columns.append(name)
        self.n_features = offset + len(self.numeric_columns)
        return self

    def transform(self, records) -> np.ndarray:
        if self.n_features == 0:
            raise ValueError("featurizer is not fitted")
        x = np.zeros((len(records), self.n_features))
        numeric_offset = self.n_features - len(self.numeric_columns)
        for row, r in enumerate(records):
            for name, columns in self.token_columns.items():
                for token in normalize(_field_value(r, name), self.prep).tokens:
                    col = columns.get(token)
                    if col is not None:
                        x[row, col] += 1.0
            for name, columns in self.category_columns.items():
                col = columns.get(str(_field_value(r, name)))
                if col is not None:
                    x[row, col] = 1.0
            for k, name in enumerate(self.numeric_columns):
                value = getattr(r, name)
                x[row, numeric_offset + k] = 0.0 if value is None else float(value)
        return x

    def feature_names(self) -> list[str]:
        names = [""] * self.n_features
        for fname, columns in self.token_columns.items():
            for token, col in columns.items():
                names[col] = f"{fname}:{token}"
        for fname, columns in self.category_columns.items():
            for value, col in columns.items():
                names[col] = f"{fname}={value}"
        numeric_offset = self.n_features - len(self.numeric_columns)
        for k, fname in enumerate(self.numeric_columns):
            names[numeric_offset + k] = fname
        return names

    def to_dict(self) -> dict:
        return {
            "fields": list(self.fields),
            "top_words": self.top_words,
            "prep": prep_to_dict(self.prep),
            "token_columns": self.token_columns,
            "category_columns": self.category_columns,
            "numeric_columns": self.numeric_columns,
            "n_features": self.n_features,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "TopWordFeaturizer":
        out = cls(fields=tuple(raw["fields"]), top_words=int(raw["top_words"]),
                  prep=prep_from_dict(raw["prep"]))
        out.token_columns = {k: {t: int(c) for t, c in v.items()}
                             for k, v in raw["token_columns"].items()}
        out.category_columns = {k: {t: int(c) for t, c in v.items()}
                                for k, v in raw["category_columns"].items()}
        out.numeric_columns = list(raw["numeric_columns"])
        out.n_features = int(raw["n_features"])
        return out


def prep_to_dict(prep: TextPrepConfig) -> dict:
    return {
        "stopwords": sorted(prep.stopwords),
        "max_tokens": prep.max_tokens,
        "typo_min_freq": prep.typo_min_freq,
    }


def prep_from_dict(raw: dict) -> TextPrepConfig:
    return TextPrepConfig(
        stopwords=frozenset(raw["stopwords"]),
        max_tokens=int(raw["max_tokens"]),
        typo_min_freq=int(raw["typo_min_freq"]),
    )
