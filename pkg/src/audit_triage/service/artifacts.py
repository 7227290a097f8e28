"""Data-directory layout consumed by the review service.

    checks.jsonl           corpus (canonical record schema)
    pairs.jsonl            scored duplicate pairs from the detection run
    scores.jsonl           per-check {id, p_pass by label mode, severity}
    config.json            initial thresholds
    decision_log.jsonl     append-only reviewer actions
    snapshot.json          periodic state snapshot (optional)
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..corpus import CheckRecord, load_checks
from ..dedup import DuplicatePair, load_pairs
from .state import Thresholds

CHECKS_FILE = "checks.jsonl"
PAIRS_FILE = "pairs.jsonl"
SCORES_FILE = "scores.jsonl"
CONFIG_FILE = "config.json"
LOG_FILE = "decision_log.jsonl"
SNAPSHOT_FILE = "snapshot.json"


@dataclass
class CheckScores:
    p_pass: dict[str, float]  # label mode -> probability
    severity: float


@dataclass
class DataBundle:
    data_dir: Path
    checks: list[CheckRecord] = field(default_factory=list)
    pairs: list[DuplicatePair] | None = None
    scores: dict[str, CheckScores] | None = None
    thresholds: Thresholds = field(default_factory=Thresholds)

    def check_by_id(self, check_id: str) -> CheckRecord | None:
        if not hasattr(self, "_by_id"):
            self._by_id = {c.id: c for c in self.checks}
        return self._by_id.get(check_id)


def save_scores(scores: dict[str, CheckScores], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for check_id in scores:
            s = scores[check_id]
            fh.write(json.dumps({
                "id": check_id,
                "p_pass": {mode: float(v) for mode, v in s.p_pass.items()},
                "severity": float(s.severity),
            }) + "\n")


def load_scores(path) -> dict[str, CheckScores]:
    scores: dict[str, CheckScores] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                raw = json.loads(line)
                scores[raw["id"]] = CheckScores(
                    p_pass={m: float(v) for m, v in raw["p_pass"].items()},
                    severity=float(raw["severity"]),
                )
    return scores


def load_bundle(data_dir) -> DataBundle:
    data_dir = Path(data_dir)
    bundle = DataBundle(data_dir=data_dir)
    checks_path = data_dir / CHECKS_FILE
    if checks_path.exists():
        bundle.checks = load_checks(checks_path).records
    pairs_path = data_dir / PAIRS_FILE
    if pairs_path.exists():
        bundle.pairs = load_pairs(pairs_path)
    scores_path = data_dir / SCORES_FILE
    if scores_path.exists():
        bundle.scores = load_scores(scores_path)
    config_path = data_dir / CONFIG_FILE
    if config_path.exists():
        raw = json.loads(config_path.read_text("utf-8"))
        bundle.thresholds = Thresholds(
            pass_threshold=float(raw.get("pass_threshold", 0.5)),
            severity_t=float(raw.get("severity_t", 0.50)),
            label_mode=str(raw.get("label_mode", "throttled")),
        )
    return bundle


def load_snapshot(data_dir) -> dict | None:
    path = Path(data_dir) / SNAPSHOT_FILE
    if not path.exists():
        return None
    return json.loads(path.read_text("utf-8"))


def write_snapshot(data_dir, snapshot: dict) -> None:
    path = Path(data_dir) / SNAPSHOT_FILE
    tmp = path.with_suffix(".json.tmp")
    tmp.write_text(json.dumps(snapshot), "utf-8")
    tmp.replace(path)
