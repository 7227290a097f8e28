"""Bagged decision trees with weighted Gini splits on top-word count features."""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict, field

import numpy as np

from ..corpus import CheckRecord
from .features import TopWordFeaturizer, DEFAULT_FIELDS
from .softmax import _prepare_labels


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    max_depth: int | None = 16  # None grows until pure
    min_samples_leaf: int = 1
    bootstrap: bool = True
    top_words: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")


@dataclass
class TreeNode:
    feature: int = -1
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    value: np.ndarray | None = None  # leaf: weighted (fail, pass) fractions

    def to_dict(self) -> dict:
        if self.value is not None:
            return {"value": [float(v) for v in self.value]}
        return {
            "feature": self.feature,
            "threshold": float(self.threshold),
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "TreeNode":
        if "value" in raw:
            return cls(value=np.array(raw["value"], dtype=np.float64))
        return cls(
            feature=int(raw["feature"]),
            threshold=float(raw["threshold"]),
            left=cls.from_dict(raw["left"]),
            right=cls.from_dict(raw["right"]),
        )


def _leaf(y: np.ndarray, w: np.ndarray) -> TreeNode:
    w1 = float(w[y == 1].sum())
    w0 = float(w.sum()) - w1
    total = w0 + w1
    return TreeNode(value=np.array([w0 / total, w1 / total]))


def _best_split(x, y, w, feature_ids, min_leaf):
    """Lowest weighted-Gini (feature, threshold) among candidate features."""
    n = y.shape[0]
    best = None  # (score, feature, threshold)
    for f in feature_ids:
        values = x[:, f]
        order = np.argsort(values, kind="mergesort")
        sv = values[order]
        if sv[0] == sv[-1]:
            continue
        sw = w[order]
        sy = y[order]
        w1 = np.cumsum(sw * sy)
        wt = np.cumsum(sw)
        w0 = wt - w1
        total_w = wt[-1]
        total_w1 = w1[-1]
        total_w0 = w0[-1]

        cut = np.arange(1, n)  # left size after splitting below index `cut`
        valid = (sv[1:] > sv[:-1]) & (cut >= min_leaf) & ((n - cut) >= min_leaf)
        if not np.any(valid):
            continue
        wl = wt[:-1][valid]
        wl1 = w1[:-1][valid]
        wl0 = w0[:-1][valid]
        wr = total_w - wl
        wr1 = total_w1 - wl1
        wr0 = total_w0 - wl0
        # weighted child impurity, common factor 1/total_w dropped
        gini_l = wl - (wl0 * wl0 + wl1 * wl1) / wl
        gini_r = wr - (wr0 * wr0 + wr1 * wr1) / wr
        scores = gini_l + gini_r
        k = int(np.argmin(scores))
        score = float(scores[k])
        if best is None or score < best[0]:
            pos = cut[valid][k]
            best = (score, int(f), float((sv[pos - 1] + sv[pos]) / 2.0))
    return best


def _grow(x, y, w, depth, cfg: ForestConfig, rng: np.random.Generator, n_subset: int) -> TreeNode:
    n = y.shape[0]
    w1 = float(w[y == 1].sum())
    w0 = float(w.sum()) - w1
    if ((cfg.max_depth is not None and depth >= cfg.max_depth)
            or n < 2 * cfg.min_samples_leaf or w0 == 0.0 or w1 == 0.0):
        return _leaf(y, w)
    feature_ids = rng.choice(x.shape[1], size=n_subset, replace=False)
    best = _best_split(x, y, w, feature_ids, cfg.min_samples_leaf)
    if best is None and n_subset < x.shape[1]:
        # random subset had no usable split; widen to all features before leafing
        best = _best_split(x, y, w, np.arange(x.shape[1]), cfg.min_samples_leaf)
    if best is None:
        return _leaf(y, w)
    _, feature, threshold = best
    mask = x[:, feature] <= threshold
    node = TreeNode(feature=feature, threshold=threshold)
    node.left = _grow(x[mask], y[mask], w[mask], depth + 1, cfg, rng, n_subset)
    node.right = _grow(x[~mask], y[~mask], w[~mask], depth + 1, cfg, rng, n_subset)
    return node


def _tree_proba(node: TreeNode, x: np.ndarray, out: np.ndarray, rows: np.ndarray) -> None:
    if node.value is not None:
        out[rows] = node.value[1]
        return
    mask = x[rows, node.feature] <= node.threshold
    _tree_proba(node.left, x, out, rows[mask])
    _tree_proba(node.right, x, out, rows[~mask])


@dataclass
class RandomForestModel:
    """Bootstrap-aggregated trees; probability = mean of leaf pass fractions."""

    featurizer: TopWordFeaturizer
    trees: list[TreeNode]
    config: ForestConfig
    label_mode: str = "throttled"
    kind: str = "forest"

    def predict_proba_matrix(self, x: np.ndarray) -> np.ndarray:
        probs = np.zeros((len(self.trees), x.shape[0]))
        rows = np.arange(x.shape[0])
        for i, tree in enumerate(self.trees):
            _tree_proba(tree, x, probs[i], rows)
        return probs.mean(axis=0)

    def predict_proba(self, records) -> np.ndarray:
        return self.predict_proba_matrix(self.featurizer.transform(records))

    def predict_proba_one(self, record: CheckRecord) -> float:
        return float(self.predict_proba([record])[0])


def train_random_forest(records, config: ForestConfig | None = None, sample_weights=None,
                        label_mode: str = "throttled",
                        featurizer: TopWordFeaturizer | None = None,
                        fields: tuple[str, ...] = DEFAULT_FIELDS) -> RandomForestModel:
    """Fit trees on bootstrap samples; per-tree seeds derive from the master seed."""
    cfg = config or ForestConfig()
    if len(records) == 0:
        raise ValueError("empty training set")
    y = np.array([1 if r.throttle_label(label_mode) == "pass" else 0 for r in records],
                 dtype=np.int64)
    weights = (np.ones(len(records)) if sample_weights is None
               else np.asarray(sample_weights, dtype=np.float64))
    if weights.shape[0] != len(records):
        raise ValueError("one sample weight per record is required")

    if featurizer is None:
        featurizer = TopWordFeaturizer(fields=fields, top_words=cfg.top_words).fit(records)
    x = featurizer.transform(records)
    n, n_features = x.shape
    n_subset = max(1, int(math.sqrt(n_features)))

    trees = []
    for t in range(cfg.n_trees):
        rng = np.random.default_rng([cfg.seed, t])
        if cfg.bootstrap:
            idx = np.sort(rng.integers(0, n, size=n))
            xs, ys, ws = x[idx], y[idx], weights[idx]
        else:
            xs, ys, ws = x, y, weights
        trees.append(_grow(xs, ys, ws, 0, cfg, rng, min(n_subset, n_features)))
    return RandomForestModel(featurizer=featurizer, trees=trees, config=cfg,
                             label_mode=label_mode)


def forest_to_dict(model: RandomForestModel) -> dict:
    return {
        "kind": model.kind,
        "label_mode": model.label_mode,
        "config": asdict(model.config),
        "featurizer": model.featurizer.to_dict(),
        "trees": [tree.to_dict() for tree in model.trees],
    }


def forest_from_dict(raw: dict) -> RandomForestModel:
    return RandomForestModel(
        featurizer=TopWordFeaturizer.from_dict(raw["featurizer"]),
        trees=[TreeNode.from_dict(t) for t in raw["trees"]],
        config=ForestConfig(**raw["config"]),
        label_mode=raw["label_mode"],
    )
