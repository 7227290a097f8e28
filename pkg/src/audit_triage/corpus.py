"""Check-record schema, dataset IO and train/test splitting.

Canonical storage is JSONL, one record per line; CSV is accepted on
ingest only. Rows with missing checklist text are dropped and counted,
missing optional fields become empty values, and duplicate ids are a
hard error.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from .errors import CorpusFormatError, DuplicateIdError

FIELD_NAMES = (
    "id", "asset_type", "vendor", "site", "checklist_text", "focus_points",
    "criticality", "severity_score", "severity_group", "ioq_status", "vq_status",
)

_STATUS_VALUES = ("pass", "fail")


@dataclass
class CheckRecord:
    """One equipment-audit check with its features and audit outcomes."""

    id: str
    asset_type: str
    vendor: str
    checklist_text: str
    site: str | None = None
    focus_points: str = ""
    criticality: str = ""
    severity_score: float | None = None
    severity_group: str | None = None
    ioq_status: str | None = None
    vq_status: str | None = None

    def text(self) -> str:
        """Free text used for vectorization: checklist plus focus points."""
        if self.focus_points:
            return f"{self.checklist_text} {self.focus_points}"
        return self.checklist_text

    def throttle_label(self, mode: str = "throttled") -> str:
        """Binary label under a label mode.

        ``throttled``: pass iff both IOQ and VQ passed (a missing VQ
        outcome counts as not passed). ``ioq_only``: the IOQ outcome.
        """
        if mode == "ioq_only":
            if self.ioq_status is None:
                raise ValueError(f"record {self.id} has no ioq_status")
            return self.ioq_status
        if mode == "throttled":
            if self.ioq_status is None:
                raise ValueError(f"record {self.id} has no ioq_status")
            return "pass" if (self.ioq_status == "pass" and self.vq_status == "pass") else "fail"
        raise ValueError(f"unknown label mode {mode!r}")


@dataclass
class SeverityEvent:
    """A recorded incident whose text indicates the risk of skipping a check."""

    id: str
    description: str

    def __post_init__(self):
        if not self.description.strip():
            raise ValueError(f"severity event {self.id!r} has an empty description")


@dataclass
class DatasetSplit:
    train: list[CheckRecord]
    test: list[CheckRecord]
    seed: int


@dataclass
class LoadResult:
    """Outcome of an ingest: parsed records plus the count of dropped rows."""

    records: list[CheckRecord]
    dropped: int = 0

    def __iter__(self):
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)


def _parse_status(value, row: int, column: str) -> str | None:
    if value is None or value == "":
        return None
    text = str(value).strip().lower()
    if text == "":
        return None
    if text not in _STATUS_VALUES:
        raise CorpusFormatError(
            f"row {row}: {column} must be one of {_STATUS_VALUES}, got {value!r}", row=row
        )
    return text


def _parse_severity_score(value, row: int) -> float | None:
    if value is None or value == "":
        return None
    try:
        score = float(value)
    except (TypeError, ValueError):
        raise CorpusFormatError(f"row {row}: severity_score {value!r} is not a number", row=row)
    if not (0.0 <= score <= 1.0):
        raise CorpusFormatError(f"row {row}: severity_score {score} outside [0, 1]", row=row)
    return score


def _record_from_mapping(raw: dict, row: int) -> CheckRecord | None:
    unknown = set(raw) - set(FIELD_NAMES)
    if unknown:
        raise CorpusFormatError(
            f"row {row}: unknown column(s) {sorted(unknown)}", row=row
        )
    rec_id = str(raw.get("id") or "").strip()
    if not rec_id:
        raise CorpusFormatError(f"row {row}: missing id", row=row)
    checklist = str(raw.get("checklist_text") or "")
    if not checklist.strip():
        return None  # dropped, counted by the caller
    site = raw.get("site")
    severity_group = raw.get("severity_group")
    return CheckRecord(
        id=rec_id,
        asset_type=str(raw.get("asset_type") or ""),
        vendor=str(raw.get("vendor") or ""),
        checklist_text=checklist,
        site=str(site) if site not in (None, "") else None,
        focus_points=str(raw.get("focus_points") or ""),
        criticality=str(raw.get("criticality") or ""),
        severity_score=_parse_severity_score(raw.get("severity_score"), row),
        severity_group=str(severity_group) if severity_group not in (None, "") else None,
        ioq_status=_parse_status(raw.get("ioq_status"), row, "ioq_status"),
        vq_status=_parse_status(raw.get("vq_status"), row, "vq_status"),
    )


def load_checks(path, format: str | None = None) -> LoadResult:
    """Load check records from a JSONL or CSV file.

    The format is inferred from the extension unless given explicitly.
    Raises ``CorpusFormatError`` on unparseable rows or unknown columns
    and ``DuplicateIdError`` when two rows share an id.
    """
    path = Path(path)
    if format is None:
        format = "csv" if path.suffix.lower() == ".csv" else "jsonl"
    if format not in ("csv", "jsonl"):
        raise ValueError(f"unknown format {format!r}")

    rows: list[tuple[int, dict]] = []
    if format == "jsonl":
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    raw = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise CorpusFormatError(f"row {lineno}: invalid JSON ({exc})", row=lineno)
                if not isinstance(raw, dict):
                    raise CorpusFormatError(f"row {lineno}: expected an object", row=lineno)
                rows.append((lineno, raw))
    else:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames or []
            unknown = set(header) - set(FIELD_NAMES)
            if unknown:
                raise CorpusFormatError(f"unknown column(s) {sorted(unknown)} in CSV header")
            for lineno, raw in enumerate(reader, start=1):
                if None in raw:
                    raise CorpusFormatError(f"row {lineno}: more cells than header columns", row=lineno)
                rows.append((lineno, raw))

    records: list[CheckRecord] = []
    seen: dict[str, int] = {}
    dropped = 0
    for lineno, raw in rows:
        record = _record_from_mapping(raw, lineno)
        if record is None:
            dropped += 1
            continue
        if record.id in seen:
            raise DuplicateIdError(
                f"row {lineno}: duplicate id {record.id!r} (first seen at row {seen[record.id]})",
                row=lineno, record_id=record.id,
            )
        seen[record.id] = lineno
        records.append(record)
    return LoadResult(records=records, dropped=dropped)


def record_to_dict(record: CheckRecord) -> dict:
    """JSON-ready mapping with optional empty fields omitted."""
    raw = asdict(record)
    return {k: v for k, v in raw.items() if v is not None}


def save_checks(records, path) -> None:
    """Write records as JSONL, one object per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record_to_dict(record)) + "\n")


def load_severity_events(path) -> list[SeverityEvent]:
    """Read severity events from JSONL ({id, description} per line)."""
    events = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            raw = json.loads(line)
            event_id = str(raw.get("id") or "").strip()
            if not event_id:
                raise CorpusFormatError(f"row {lineno}: missing event id", row=lineno)
            if event_id in seen:
                raise DuplicateIdError(f"row {lineno}: duplicate event id {event_id!r}",
                                       row=lineno, record_id=event_id)
            seen.add(event_id)
            events.append(SeverityEvent(id=event_id, description=str(raw.get("description") or "")))
    return events


def save_severity_events(events, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for event in events:
            fh.write(json.dumps({"id": event.id, "description": event.description}) + "\n")


def split_train_test(records: list[CheckRecord], train_fraction: float, seed: int) -> DatasetSplit:
    """Deterministic stratified split on the IOQ outcome.

    Each class keeps at least one record on each side whenever it has two
    or more members; the overall train size lands within one record of
    ``train_fraction``.
    """
    if not (0.0 < train_fraction < 1.0):
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    if len(records) < 2:
        raise ValueError("need at least 2 records to split")

    by_class: dict[str, list[int]] = {}
    for i, record in enumerate(records):
        by_class.setdefault(record.ioq_status or "", []).append(i)
    labels = sorted(by_class)
    if len(labels) < 2:
        raise ValueError(
            f"stratified split needs both outcome classes; found only {labels[0]!r}"
        )

    n = len(records)
    target_total = min(max(int(round(n * train_fraction)), 1), n - 1)

    lower = {c: (1 if len(by_class[c]) >= 2 else 0) for c in labels}
    upper = {c: (len(by_class[c]) - 1 if len(by_class[c]) >= 2 else len(by_class[c])) for c in labels}
    want = {c: len(by_class[c]) * train_fraction for c in labels}
    take = {c: min(max(int(want[c]), lower[c]), upper[c]) for c in labels}

    diff = target_total - sum(take.values())
    while diff != 0:
        if diff > 0:
            candidates = [c for c in labels if take[c] < upper[c]]
            if not candidates:
                break
            chosen = max(candidates, key=lambda c: (want[c] - take[c], c))
            take[chosen] += 1
            diff -= 1
        else:
            candidates = [c for c in labels if take[c] > lower[c]]
            if not candidates:
                break
            chosen = min(candidates, key=lambda c: (want[c] - take[c], c))
            take[chosen] -= 1
            diff += 1

    rng = np.random.default_rng(seed)
    train_idx: list[int] = []
    for c in labels:
        members = by_class[c]
        order = rng.permutation(len(members))
        train_idx.extend(members[j] for j in order[: take[c]])
    train_set = set(train_idx)
    train = [records[i] for i in range(n) if i in train_set]
    test = [records[i] for i in range(n) if i not in train_set]
    return DatasetSplit(train=train, test=test, seed=seed)
