"""Evaluation suite: confusion counts, accuracy family, F1, rank-based AUC.

"pass" is the positive class everywhere; reports carry the convention
explicitly. Zero denominators raise ``MetricUndefinedError`` instead of
silently returning 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict

import numpy as np

from .errors import MetricUndefinedError

POSITIVE_LABEL = "pass"
NEGATIVE_LABEL = "fail"


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def positives(self) -> int:
        return self.tp + self.fn

    @property
    def negatives(self) -> int:
        return self.tn + self.fp

    def swapped(self) -> "ConfusionMatrix":
        """The same predictions with the class roles exchanged."""
        return ConfusionMatrix(tp=self.tn, fp=self.fn, tn=self.tp, fn=self.fp)


def _as_binary(labels) -> np.ndarray:
    arr = np.asarray([1 if y == POSITIVE_LABEL else 0 if y == NEGATIVE_LABEL else -1
                      for y in labels], dtype=np.int64)
    if np.any(arr < 0):
        bad = [y for y in labels if y not in (POSITIVE_LABEL, NEGATIVE_LABEL)]
        raise ValueError(f"labels must be pass/fail, got {bad[:3]}")
    return arr


def confusion(scores, labels, threshold: float) -> ConfusionMatrix:
    """Tally a confusion matrix; predicted positive iff score >= threshold."""
    scores = np.asarray(scores, dtype=np.float64)
    y = _as_binary(labels)
    if scores.shape[0] != y.shape[0]:
        raise ValueError(f"{scores.shape[0]} scores vs {y.shape[0]} labels")
    if scores.shape[0] == 0:
        raise ValueError("empty input")
    pred = scores >= threshold
    return ConfusionMatrix(
        tp=int(np.sum(pred & (y == 1))),
        fp=int(np.sum(pred & (y == 0))),
        tn=int(np.sum(~pred & (y == 0))),
        fn=int(np.sum(~pred & (y == 1))),
    )


def accuracy(cm: ConfusionMatrix) -> float:
    total = cm.positives + cm.negatives
    if total == 0:
        raise MetricUndefinedError("accuracy undefined: no samples")
    return (cm.tp + cm.tn) / total


def sensitivity(cm: ConfusionMatrix) -> float:
    if cm.positives == 0:
        raise MetricUndefinedError("sensitivity undefined: no positive samples")
    return cm.tp / cm.positives


def specificity(cm: ConfusionMatrix) -> float:
    if cm.negatives == 0:
        raise MetricUndefinedError("specificity undefined: no negative samples")
    return cm.tn / cm.negatives


def f1(cm: ConfusionMatrix) -> float:
    denom = cm.tp + 0.5 * (cm.fp + cm.fn)
    if denom == 0:
        raise MetricUndefinedError("F1 undefined: no positive predictions or samples")
    return cm.tp / denom


def f1_fail(cm: ConfusionMatrix) -> float:
    """F1 with the fail class treated as positive."""
    return f1(cm.swapped())


def roc_auc(scores, labels) -> float:
    """Area under the ROC curve via the rank statistic.

    Tied scores get half credit, which makes the value identical to
    trapezoidal integration over the swept thresholds.
    """
    scores = np.asarray(scores, dtype=np.float64)
    y = _as_binary(labels)
    if scores.shape[0] != y.shape[0]:
        raise ValueError(f"{scores.shape[0]} scores vs {y.shape[0]} labels")
    n_pos = int(np.sum(y == 1))
    n_neg = int(np.sum(y == 0))
    if n_pos == 0 or n_neg == 0:
        raise MetricUndefinedError("AUC undefined: both classes must be present")

    order = np.argsort(scores, kind="mergesort")
    sorted_scores = scores[order]
    ranks = np.empty(scores.shape[0], dtype=np.float64)
    i = 0
    while i < sorted_scores.shape[0]:
        j = i
        while j + 1 < sorted_scores.shape[0] and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0  # average 1-based rank
        i = j + 1

    rank_sum_pos = float(np.sum(ranks[y == 1]))
    u_stat = rank_sum_pos - n_pos * (n_pos + 1) / 2.0
    return u_stat / (n_pos * n_neg)


@dataclass
class EvalReport:
    """One classifier's scores on a labelled split."""

    auc: float
    accuracy: float
    sensitivity: float
    specificity: float
    f1_pass: float
    f1_fail: float
    threshold: float
    training_time: float = 0.0
    positive_label: str = POSITIVE_LABEL

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def evaluate_scores(scores, labels, threshold: float = 0.5,
                    training_time: float = 0.0) -> EvalReport:
    cm = confusion(scores, labels, threshold)
    return EvalReport(
        auc=roc_auc(scores, labels),
        accuracy=accuracy(cm),
        sensitivity=sensitivity(cm),
        specificity=specificity(cm),
        f1_pass=f1(cm),
        f1_fail=f1_fail(cm),
        threshold=threshold,
        training_time=training_time,
    )


def report_table(reports: dict[str, EvalReport]) -> str:
    """Aligned text table, one row per named report."""
    headers = ["Model", "AUC", "Accuracy", "Sensitivity", "Specificity", "Training time (s)"]
    rows = [
        [name, f"{r.auc:.4f}", f"{r.accuracy:.4f}", f"{r.sensitivity:.4f}",
         f"{r.specificity:.4f}", f"{r.training_time:.2f}"]
        for name, r in reports.items()
    ]
    widths = [max(len(h), *(len(row[i]) for row in rows)) if rows else len(h)
              for i, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(headers))]
    lines.append("  ".join("-" * w for w in widths))
    for row in rows:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)))
    return "\n".join(lines)
