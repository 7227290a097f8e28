"""Combine pass predictions, severity gating and duplicate decisions into
throttle verdicts, priority levels, what-if sweeps and summary reports.

Duplicate removal is applied first: a check removed as the non-surviving
member of an accepted pair is never counted again by the throttle logic.
A check is throttled only when its pass probability clears the threshold
and the severity gate permits it; otherwise the reason records which gate
stopped it.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, asdict
from enum import Enum

import numpy as np

from .corpus import CheckRecord
from .dedup import DedupReport, DuplicatePair, TierBounds
from .severity import SeverityModel, SeverityScore, severity_gate, severity_score

LABEL_MODES = ("throttled", "ioq_only")


class Priority(Enum):
    LEVEL1 = "Level1"  # low priority: confidently passing
    LEVEL2 = "Level2"
    LEVEL3 = "Level3"  # high priority: needs human attention


class Reason(Enum):
    THROTTLED = "throttled"
    BLOCKED_BY_SEVERITY = "blocked_by_severity"
    PREDICTED_FAIL = "predicted_fail"
    EXCLUDED_DUPLICATE = "excluded_duplicate"


@dataclass(frozen=True)
class PriorityBounds:
    """Band edges for the three priority levels.

    The band (level3_max, level2_min] has no level of its own and is
    absorbed into level 3; decisions falling there carry a gap flag.
    """

    level1_min: float = 0.90
    level2_min: float = 0.79
    level3_max: float = 0.72

    def __post_init__(self):
        if not (0.0 <= self.level3_max <= self.level2_min < self.level1_min <= 1.0):
            raise ValueError("priority bounds must satisfy level3_max <= level2_min < level1_min")


@dataclass
class TriageConfig:
    classifier_kind: str = "softmax"
    pass_threshold: float = 0.5
    severity_t: float = 0.50
    label_mode: str = "throttled"
    tier_bounds: TierBounds = field(default_factory=TierBounds)
    priority_bounds: PriorityBounds = field(default_factory=PriorityBounds)

    def __post_init__(self):
        if self.label_mode not in LABEL_MODES:
            raise ValueError(f"label_mode must be one of {LABEL_MODES}")
        for name in ("pass_threshold", "severity_t"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise ValueError(f"{name} {value} outside [0, 1]")


def assign_priority(p_pass: float, bounds: PriorityBounds | None = None) -> Priority:
    """Map a pass probability to its review priority; total on [0, 1]."""
    bounds = bounds or PriorityBounds()
    if not (0.0 <= p_pass <= 1.0):
        raise ValueError(f"p_pass {p_pass} outside [0, 1]")
    if p_pass > bounds.level1_min:
        return Priority.LEVEL1
    if p_pass > bounds.level2_min:
        return Priority.LEVEL2
    return Priority.LEVEL3


def in_gap_band(p_pass: float, bounds: PriorityBounds | None = None) -> bool:
    bounds = bounds or PriorityBounds()
    return bounds.level3_max < p_pass <= bounds.level2_min


@dataclass
class TriageDecision:
    check_id: str
    p_pass: float
    severity: SeverityScore
    priority: Priority
    gap_band: bool
    throttled: bool
    reason: Reason

    def to_dict(self) -> dict:
        return {
            "check_id": self.check_id,
            "p_pass": float(self.p_pass),
            "severity_score": float(self.severity.score),
            "nearest_cluster": int(self.severity.nearest_cluster),
            "priority": self.priority.value,
            "gap_band": self.gap_band,
            "throttled": self.throttled,
            "reason": self.reason.value,
        }


def removed_ids(duplicate_pairs, known_ids=None) -> set[str]:
    """Non-surviving members of accepted pairs (the larger id of each pair).

    A pair whose survivor was itself already removed still removes its own
    id_b at most once; ids never removed twice.
    """
    removed: set[str] = set()
    for pair in duplicate_pairs or []:
        if known_ids is not None and (pair.id_a not in known_ids or pair.id_b not in known_ids):
            raise ValueError(f"duplicate decision references unknown check ids "
                             f"({pair.id_a!r}, {pair.id_b!r})")
        if pair.decision == "accepted":
            removed.add(pair.id_b)
    return removed


def decide(check_id: str, p_pass: float, severity: SeverityScore,
           config: TriageConfig, removed: set[str]) -> TriageDecision:
    throttled = False
    if check_id in removed:
        reason = Reason.EXCLUDED_DUPLICATE
    elif p_pass < config.pass_threshold:
        reason = Reason.PREDICTED_FAIL
    elif not severity_gate(severity.score, config.severity_t):
        reason = Reason.BLOCKED_BY_SEVERITY
    else:
        reason = Reason.THROTTLED
        throttled = True
    return TriageDecision(
        check_id=check_id,
        p_pass=float(p_pass),
        severity=severity,
        priority=assign_priority(p_pass, config.priority_bounds),
        gap_band=in_gap_band(p_pass, config.priority_bounds),
        throttled=throttled,
        reason=reason,
    )


def triage_check(record: CheckRecord, config: TriageConfig, classifier,
                 severity_model: SeverityModel,
                 duplicate_pairs: list[DuplicatePair] | None = None) -> TriageDecision:
    """Full verdict for one check."""
    from .classifiers import predict_proba
    if classifier is None or severity_model is None:
        raise ValueError("triage needs both a classifier and a severity model")
    removed = removed_ids(duplicate_pairs)
    p = predict_proba(classifier, record)
    sev = severity_score(record, severity_model)
    return decide(record.id, p, sev, config, removed)


def run_triage(records, config: TriageConfig, classifier,
               severity_model: SeverityModel,
               duplicate_pairs: list[DuplicatePair] | None = None) -> list[TriageDecision]:
    """Triage a whole dataset in one pass (batch scoring, then gating)."""
    if classifier is None or severity_model is None:
        raise ValueError("triage needs both a classifier and a severity model")
    known = {r.id for r in records}
    removed = removed_ids(duplicate_pairs, known_ids=known)
    probs = np.clip(classifier.predict_proba(records), 0.0, 1.0)
    return [
        decide(r.id, float(p), severity_score(r, severity_model), config, removed)
        for r, p in zip(records, probs)
    ]


@dataclass
class SweepCell:
    label_mode: str
    severity_t: float
    trimmed_pct: float
    blocked_pct: float
    fail_pct: float
    excluded_pct: float

    def to_dict(self) -> dict:
        return asdict(self)


def whatif_sweep(records, config: TriageConfig, classifiers_by_mode: dict,
                 severity_model: SeverityModel, t_values, label_modes=None,
                 duplicate_pairs: list[DuplicatePair] | None = None) -> list[SweepCell]:
    """Trimmed/blocked/fail percentages per (severity threshold, label mode).

    Scores are computed once per mode; each cell is a pure threshold pass,
    so one triage evaluation per cell as if run independently.
    """
    t_values = [float(t) for t in t_values]
    if not t_values:
        raise ValueError("t_values must be non-empty")
    for t in t_values:
        if not (0.0 <= t <= 1.0):
            raise ValueError(f"severity threshold {t} outside [0, 1]")
    modes = list(label_modes) if label_modes else [config.label_mode]
    for mode in modes:
        if mode not in classifiers_by_mode:
            raise ValueError(f"no classifier supplied for label mode {mode!r}")

    known = {r.id for r in records}
    removed = removed_ids(duplicate_pairs, known_ids=known)
    total = len(records)
    sev = np.array([severity_score(r, severity_model).score for r in records])
    active = np.array([r.id not in removed for r in records])

    cells = []
    for mode in modes:
        probs = np.clip(classifiers_by_mode[mode].predict_proba(records), 0.0, 1.0)
        passing = probs >= config.pass_threshold
        for t in t_values:
            permitted = sev < t
            trimmed = int(np.sum(active & passing & permitted))
            blocked = int(np.sum(active & passing & ~permitted))
            fails = int(np.sum(active & ~passing))
            cells.append(SweepCell(
                label_mode=mode,
                severity_t=t,
                trimmed_pct=100.0 * trimmed / total if total else 0.0,
                blocked_pct=100.0 * blocked / total if total else 0.0,
                fail_pct=100.0 * fails / total if total else 0.0,
                excluded_pct=100.0 * int(np.sum(~active)) / total if total else 0.0,
            ))
    return cells


def sweep_to_csv(cells: list[SweepCell], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label_mode", "severity_t", "trimmed_pct", "blocked_pct",
                         "fail_pct", "excluded_pct"])
        for cell in cells:
            writer.writerow([cell.label_mode, repr(cell.severity_t),
                             repr(cell.trimmed_pct), repr(cell.blocked_pct),
                             repr(cell.fail_pct), repr(cell.excluded_pct)])


@dataclass
class SummaryReport:
    total: int
    reason_counts: dict[str, int]
    priority_histogram: dict[str, int]
    gap_band_count: int
    combined_reduction_pct: float
    dedup: dict | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def summary_report(decisions: list[TriageDecision],
                   dedup: DedupReport | None = None) -> SummaryReport:
    """Totals by reason and priority; combined reduction counts each check once."""
    reason_counts = {r.value: 0 for r in Reason}
    priority_histogram = {p.value: 0 for p in Priority}
    gap = 0
    for d in decisions:
        reason_counts[d.reason.value] += 1
        priority_histogram[d.priority.value] += 1
        gap += int(d.gap_band)
    total = len(decisions)
    saved = reason_counts[Reason.THROTTLED.value] + reason_counts[Reason.EXCLUDED_DUPLICATE.value]
    return SummaryReport(
        total=total,
        reason_counts=reason_counts,
        priority_histogram=priority_histogram,
        gap_band_count=gap,
        combined_reduction_pct=100.0 * saved / total if total else 0.0,
        dedup=dedup.to_dict() if dedup is not None else None,
    )


def save_decisions(decisions: list[TriageDecision], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for d in decisions:
            fh.write(json.dumps(d.to_dict()) + "\n")
