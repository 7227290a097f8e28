"""Review state and its append-only decision log.

All reviewer-visible state (pair decisions, removed checks, thresholds)
is derived from artifacts plus the log, so replaying the log over the
same artifacts reconstructs the state exactly. Appends are serialized by
a lock; a snapshot is written every N appends to bound replay cost.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field, asdict
from datetime import datetime, timezone
from pathlib import Path

from ..dedup import DuplicatePair

ACTIONS = ("accept_pair", "reject_pair", "set_threshold")


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass(frozen=True)
class LogEntry:
    seq: int
    ts: str
    actor: str
    action: str
    payload: dict

    def to_json(self) -> str:
        return json.dumps(asdict(self), ensure_ascii=False)

    @classmethod
    def from_json(cls, line: str) -> "LogEntry":
        raw = json.loads(line)
        return cls(seq=int(raw["seq"]), ts=raw["ts"], actor=raw["actor"],
                   action=raw["action"], payload=raw["payload"])


class DecisionLog:
    """Append-only JSONL log with strictly increasing sequence numbers."""

    def __init__(self, path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self.last_seq = 0
        if self.path.exists():
            for entry in self.entries():
                self.last_seq = entry.seq

    def append(self, action: str, payload: dict, actor: str, ts: str | None = None) -> LogEntry:
        if action not in ACTIONS:
            raise ValueError(f"unknown action {action!r}")
        with self._lock:
            entry = LogEntry(seq=self.last_seq + 1, ts=ts or utc_now(), actor=actor,
                             action=action, payload=payload)
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(entry.to_json() + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            self.last_seq = entry.seq
            return entry

    def entries(self, after_seq: int = 0):
        if not self.path.exists():
            return
        with open(self.path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    entry = LogEntry.from_json(line)
                    if entry.seq > after_seq:
                        yield entry


@dataclass
class Thresholds:
    pass_threshold: float = 0.5
    severity_t: float = 0.50
    label_mode: str = "throttled"


@dataclass
class ReviewState:
    """Mutable review-session state; every mutation goes through apply()."""

    check_ids: list[str] = field(default_factory=list)
    pairs: dict[tuple[str, str], DuplicatePair] | None = None
    thresholds: Thresholds = field(default_factory=Thresholds)
    removed: set[str] = field(default_factory=set)
    applied_seq: int = 0

    @property
    def total(self) -> int:
        return len(self.check_ids)

    @property
    def active_count(self) -> int:
        return self.total - len(self.removed)

    def pair(self, id_a: str, id_b: str) -> DuplicatePair | None:
        if self.pairs is None:
            return None
        key = (id_a, id_b) if id_a < id_b else (id_b, id_a)
        return self.pairs.get(key)

    def apply(self, entry: LogEntry) -> None:
        if entry.action in ("accept_pair", "reject_pair"):
            pair = self.pair(entry.payload["id_a"], entry.payload["id_b"])
            if pair is None:
                raise ValueError(
                    f"log entry {entry.seq} references unknown pair "
                    f"({entry.payload['id_a']!r}, {entry.payload['id_b']!r})"
                )
            pair.decision = "accepted" if entry.action == "accept_pair" else "rejected"
            pair.decided_by = entry.actor
            pair.decided_at = entry.ts
            if entry.action == "accept_pair":
                self.removed.add(pair.id_b)
        elif entry.action == "set_threshold":
            payload = entry.payload
            if "pass_threshold" in payload:
                self.thresholds.pass_threshold = float(payload["pass_threshold"])
            if "severity_t" in payload:
                self.thresholds.severity_t = float(payload["severity_t"])
            if "label_mode" in payload:
                self.thresholds.label_mode = str(payload["label_mode"])
        else:
            raise ValueError(f"unknown action {entry.action!r}")
        self.applied_seq = entry.seq

    # -- snapshot / replay ----------------------------------------------------

    def snapshot_dict(self) -> dict:
        return {
            "applied_seq": self.applied_seq,
            "thresholds": asdict(self.thresholds),
            "removed": sorted(self.removed),
            "decisions": [
                {"id_a": p.id_a, "id_b": p.id_b, "decision": p.decision,
                 "decided_by": p.decided_by, "decided_at": p.decided_at}
                for p in (self.pairs or {}).values() if p.decision != "pending"
            ],
        }

    def load_snapshot(self, raw: dict) -> None:
        self.applied_seq = int(raw["applied_seq"])
        self.thresholds = Thresholds(**raw["thresholds"])
        self.removed = set(raw["removed"])
        for d in raw["decisions"]:
            pair = self.pair(d["id_a"], d["id_b"])
            if pair is not None:
                pair.decision = d["decision"]
                pair.decided_by = d.get("decided_by")
                pair.decided_at = d.get("decided_at")

    def state_fingerprint(self) -> dict:
        """Canonical view used to compare live state against a replay."""
        return {
            "thresholds": asdict(self.thresholds),
            "removed": sorted(self.removed),
            "active": self.active_count,
            "decisions": sorted(
                (p.id_a, p.id_b, p.decision, p.decided_by or "", p.decided_at or "")
                for p in (self.pairs or {}).values()
            ),
        }


def fresh_state(check_ids, pairs: list[DuplicatePair] | None,
                thresholds: Thresholds | None = None) -> ReviewState:
    """State as it stands before any log entry is applied."""
    indexed = None
    if pairs is not None:
        indexed = {}
        for p in pairs:
            copy = DuplicatePair(id_a=p.id_a, id_b=p.id_b, similarity=p.similarity,
                                 tier=p.tier)
            indexed[copy.key] = copy
    return ReviewState(check_ids=list(check_ids), pairs=indexed,
                       thresholds=thresholds or Thresholds())


def replay(check_ids, pairs: list[DuplicatePair] | None, log: DecisionLog,
           thresholds: Thresholds | None = None,
           snapshot: dict | None = None) -> ReviewState:
    """Rebuild state from artifacts + (optional snapshot) + log tail."""
    state = fresh_state(check_ids, pairs, thresholds)
    if snapshot is not None:
        state.load_snapshot(snapshot)
    for entry in log.entries(after_seq=state.applied_seq):
        state.apply(entry)
    return state
