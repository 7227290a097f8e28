"""Class rebalancing: majority down-sampling with optional minority up-weighting."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from ..metrics import NEGATIVE_LABEL, POSITIVE_LABEL

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RebalanceSpec:
    """Target majority:minority ratio, e.g. 1.0, 1.5 or 15.0."""

    target_ratio: float
    upweight: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.target_ratio < 1.0:
            raise ValueError(f"target_ratio must be >= 1, got {self.target_ratio}")


def rebalance_indices(labels, spec: RebalanceSpec) -> tuple[np.ndarray, np.ndarray]:
    """Select record indices and weights realizing the requested ratio.

    The minority class is kept whole. The majority class is down-sampled
    without replacement to floor(minority * ratio); when that target is
    not below the available majority count nothing is dropped. With
    ``upweight`` each minority record gets weight retained_majority /
    minority so total class mass equalizes; otherwise all weights are 1.
    """
    labels = list(labels)
    pos_idx = np.array([i for i, y in enumerate(labels) if y == POSITIVE_LABEL], dtype=np.int64)
    neg_idx = np.array([i for i, y in enumerate(labels) if y == NEGATIVE_LABEL], dtype=np.int64)
    if pos_idx.size + neg_idx.size != len(labels):
        raise ValueError("labels must be pass/fail")
    if pos_idx.size == 0 or neg_idx.size == 0:
        raise ValueError("rebalance requires both classes to be present")

    if neg_idx.size <= pos_idx.size:
        minority, majority = neg_idx, pos_idx
    else:
        minority, majority = pos_idx, neg_idx

    target = int(math.floor(minority.size * spec.target_ratio))
    if target >= majority.size:
        if target > majority.size:
            log.warning(
                "rebalance target %d exceeds available majority count %d; keeping all",
                target, majority.size,
            )
        retained_majority = majority
    else:
        rng = np.random.default_rng(spec.seed)
        chosen = rng.choice(majority.size, size=target, replace=False)
        retained_majority = np.sort(majority[chosen])

    keep = np.sort(np.concatenate([minority, retained_majority]))
    weights = np.ones(keep.size)
    if spec.upweight and minority.size > 0:
        minority_weight = retained_majority.size / minority.size
        minority_set = set(int(i) for i in minority)
        for pos, original in enumerate(keep):
            if int(original) in minority_set:
                weights[pos] = minority_weight
    return keep, weights


def rebalance(records, spec: RebalanceSpec, labels=None):
    """Apply ``rebalance_indices`` to check records.

    Labels default to each record's IOQ outcome. Returns the retained
    records in their original order plus one weight per retained record.
    """
    if labels is None:
        labels = [r.ioq_status for r in records]
        if any(y is None for y in labels):
            raise ValueError("rebalance needs ioq_status on every record")
    keep, weights = rebalance_indices(labels, spec)
    return [records[int(i)] for i in keep], weights
