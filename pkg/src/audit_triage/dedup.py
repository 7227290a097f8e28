"""Duplicate and near-duplicate check detection.

Pairs are only formed inside a block of records sharing asset type,
vendor and site, scored by cosine over count vectors of the normalized
checklist + focus-point text, then binned into three similarity tiers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import IntEnum
from itertools import combinations
from typing import Iterator, NamedTuple

from .corpus import CheckRecord
from .textprep import TextPrepConfig, Vocabulary, build_vocabulary, normalize
from .vectors import SparseVector, cosine_similarity, count_vectorize

MISSING_SITE = "∅"


class Tier(IntEnum):
    """Similarity tiers, ordered so higher means more alike."""

    NONE = 0
    MODERATE = 1
    HIGH = 2
    IDENTICAL = 3

    def label(self) -> str:
        return {Tier.NONE: "None", Tier.MODERATE: "Moderate",
                Tier.HIGH: "High", Tier.IDENTICAL: "Identical"}[self]

    @classmethod
    def from_label(cls, label: str) -> "Tier":
        try:
            return {"none": cls.NONE, "moderate": cls.MODERATE,
                    "high": cls.HIGH, "identical": cls.IDENTICAL}[label.lower()]
        except KeyError:
            raise ValueError(f"unknown tier {label!r}")


@dataclass(frozen=True)
class TierBounds:
    """Lower bounds of the three tiers; intervals are half-open below the next."""

    identical_min: float = 0.85
    high_min: float = 0.60
    moderate_min: float = 0.35

    def __post_init__(self):
        if not (0.0 < self.moderate_min < self.high_min < self.identical_min <= 1.0):
            raise ValueError(
                "tier bounds must satisfy 0 < moderate_min < high_min < identical_min <= 1"
            )


class BlockKey(NamedTuple):
    asset_type: str
    vendor: str
    site: str


def block_key(record: CheckRecord) -> BlockKey:
    """Normalized (asset_type, vendor, site); a missing site gets a sentinel
    so siteless records only block with other siteless records."""
    site = record.site.strip().lower() if record.site else MISSING_SITE
    return BlockKey(record.asset_type.strip().lower(), record.vendor.strip().lower(),
                    site or MISSING_SITE)


def group_blocks(records) -> dict[BlockKey, list[CheckRecord]]:
    blocks: dict[BlockKey, list[CheckRecord]] = {}
    for record in records:
        blocks.setdefault(block_key(record), []).append(record)
    return blocks


def pair_candidates(records) -> Iterator[tuple[CheckRecord, CheckRecord]]:
    """All unordered within-block pairs, each exactly once; no cross-block pairs."""
    for block in group_blocks(records).values():
        yield from combinations(block, 2)


def score_pair(a: CheckRecord, b: CheckRecord, vocab: Vocabulary,
               prep: TextPrepConfig | None = None) -> float:
    """Cosine of the two count vectors; 0 when either normalizes to nothing."""
    if block_key(a) != block_key(b):
        raise ValueError(
            f"records {a.id!r} and {b.id!r} are in different blocks; "
            "only within-block pairs are comparable"
        )
    prep = prep or TextPrepConfig()
    va = count_vectorize(normalize(a.text(), prep, source_id=a.id), vocab)
    vb = count_vectorize(normalize(b.text(), prep, source_id=b.id), vocab)
    return min(1.0, max(0.0, cosine_similarity(va, vb)))


def classify_tier(similarity: float, bounds: TierBounds | None = None) -> Tier:
    bounds = bounds or TierBounds()
    if not (0.0 <= similarity <= 1.0):
        raise ValueError(f"similarity {similarity} outside [0, 1]")
    if similarity >= bounds.identical_min:
        return Tier.IDENTICAL
    if similarity >= bounds.high_min:
        return Tier.HIGH
    if similarity >= bounds.moderate_min:
        return Tier.MODERATE
    return Tier.NONE


@dataclass
class DuplicatePair:
    """A scored candidate pair awaiting (or holding) a reviewer decision."""

    id_a: str
    id_b: str
    similarity: float
    tier: Tier
    decision: str = "pending"
    decided_by: str | None = None
    decided_at: str | None = None

    def __post_init__(self):
        if self.id_a == self.id_b:
            raise ValueError(f"a record cannot pair with itself ({self.id_a!r})")
        if self.id_a > self.id_b:
            self.id_a, self.id_b = self.id_b, self.id_a

    @property
    def key(self) -> tuple[str, str]:
        return (self.id_a, self.id_b)

    def to_dict(self) -> dict:
        out = {"id_a": self.id_a, "id_b": self.id_b,
               "similarity": float(self.similarity), "tier": self.tier.label(),
               "decision": self.decision}
        if self.decided_by is not None:
            out["decided_by"] = self.decided_by
        if self.decided_at is not None:
            out["decided_at"] = self.decided_at
        return out

    @classmethod
    def from_dict(cls, raw: dict) -> "DuplicatePair":
        return cls(id_a=raw["id_a"], id_b=raw["id_b"],
                   similarity=float(raw["similarity"]),
                   tier=Tier.from_label(raw["tier"]), decision=raw.get("decision", "pending"),
                   decided_by=raw.get("decided_by"), decided_at=raw.get("decided_at"))


def find_pairs(records, bounds: TierBounds | None = None,
               prep: TextPrepConfig | None = None,
               vocab: Vocabulary | None = None) -> list[DuplicatePair]:
    """Score every within-block pair and keep those at Moderate or above.

    Sorted by descending similarity then ids, so output order is stable.
    """
    bounds = bounds or TierBounds()
    prep = prep or TextPrepConfig()
    if vocab is None:
        token_lists = [normalize(r.text(), prep, source_id=r.id) for r in records]
        nonempty = [tl for tl in token_lists if tl.tokens]
        if not nonempty:
            return []
        vocab = build_vocabulary(nonempty, min_count=1)

    vectors: dict[str, SparseVector] = {}
    for r in records:
        vectors[r.id] = count_vectorize(normalize(r.text(), prep, source_id=r.id), vocab)

    pairs: list[DuplicatePair] = []
    for a, b in pair_candidates(records):
        sim = min(1.0, max(0.0, cosine_similarity(vectors[a.id], vectors[b.id])))
        tier = classify_tier(sim, bounds)
        if tier != Tier.NONE:
            pairs.append(DuplicatePair(id_a=a.id, id_b=b.id, similarity=sim, tier=tier))
    pairs.sort(key=lambda p: (-p.similarity, p.id_a, p.id_b))
    return pairs


@dataclass
class DedupReport:
    """Check-level tier counts: each check counted once at its highest tier."""

    total_checks: int
    counts: dict[str, int] = field(default_factory=dict)

    @property
    def identified_total(self) -> int:
        return sum(self.counts.values())

    def percentage(self, tier_label: str) -> float:
        if self.total_checks == 0:
            return 0.0
        return 100.0 * self.counts.get(tier_label, 0) / self.total_checks

    def to_dict(self) -> dict:
        rows = {label: {"number": self.counts.get(label, 0),
                        "percentage": self.percentage(label)}
                for label in ("Identical", "High", "Moderate")}
        rows["Total"] = {
            "number": self.identified_total,
            "percentage": (100.0 * self.identified_total / self.total_checks
                           if self.total_checks else 0.0),
        }
        return {"total_checks": self.total_checks, "categories": rows}

    def table(self) -> str:
        data = self.to_dict()["categories"]
        lines = [f"{'Category':<12}{'Number':>10}{'Percentage':>13}"]
        lines.append("-" * 35)
        for label in ("Identical", "High", "Moderate", "Total"):
            row = data[label]
            lines.append(f"{label:<12}{row['number']:>10}{row['percentage']:>12.1f}%")
        return "\n".join(lines)


def dedup_report(records, bounds: TierBounds | None = None,
                 prep: TextPrepConfig | None = None,
                 pairs: list[DuplicatePair] | None = None) -> DedupReport:
    """Tier participation counts over checks (not pairs)."""
    if pairs is None:
        pairs = find_pairs(records, bounds=bounds, prep=prep)
    best: dict[str, Tier] = {}
    for p in pairs:
        for rid in (p.id_a, p.id_b):
            if p.tier > best.get(rid, Tier.NONE):
                best[rid] = p.tier
    counts = {"Identical": 0, "High": 0, "Moderate": 0}
    for tier in best.values():
        counts[tier.label()] += 1
    return DedupReport(total_checks=len(list(records)), counts=counts)


def save_pairs(pairs, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in pairs:
            fh.write(json.dumps(p.to_dict(), ensure_ascii=False) + "\n")


def load_pairs(path) -> list[DuplicatePair]:
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                pairs.append(DuplicatePair.from_dict(json.loads(line)))
    return pairs
