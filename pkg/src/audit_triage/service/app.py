"""JSON-over-HTTP facade for the reviewer console.

All endpoints live under /v1; response field names are frozen in
docs/api.md. State mutations append to the decision log before they touch
in-memory state, so a crash can always be replayed.
"""

from __future__ import annotations

import threading
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from ..dedup import Tier
from ..textprep import normalize
from ..triage import LABEL_MODES, PriorityBounds, assign_priority, in_gap_band
from .artifacts import DataBundle, LOG_FILE, load_bundle, load_snapshot, write_snapshot
from .state import DecisionLog, ReviewState, Thresholds, replay, fresh_state

TIER_LABELS = ("Identical", "High", "Moderate")
DECISION_STATES = ("pending", "accepted", "rejected")
PRIORITY_LEVELS = ("Level1", "Level2", "Level3")


class DecisionBody(BaseModel):
    decision: str
    actor: str = "anonymous"


class ThresholdBody(BaseModel):
    severity_t: float | None = None
    pass_threshold: float | None = None
    label_mode: str | None = None
    actor: str = "anonymous"


def _parse_float(value: str | None, name: str, default: float) -> float:
    if value is None:
        return default
    try:
        out = float(value)
    except ValueError:
        raise HTTPException(400, f"{name} must be a number, got {value!r}")
    if not (0.0 <= out <= 1.0):
        raise HTTPException(400, f"{name} {out} outside [0, 1]")
    return out


def _parse_int(value: str | None, name: str, default: int, minimum: int) -> int:
    if value is None:
        return default
    try:
        out = int(value)
    except ValueError:
        raise HTTPException(400, f"{name} must be an integer, got {value!r}")
    if out < minimum:
        raise HTTPException(400, f"{name} must be >= {minimum}")
    return out


class ReviewService:
    """Bundle + state + log behind one mutation lock."""

    def __init__(self, bundle: DataBundle, log: DecisionLog, state: ReviewState,
                 snapshot_every: int = 100):
        self.bundle = bundle
        self.log = log
        self.state = state
        self.snapshot_every = snapshot_every
        self.lock = threading.Lock()
        self._stem_cache: dict[str, set[str]] = {}

    def stems(self, check_id: str) -> set[str]:
        if check_id not in self._stem_cache:
            record = self.bundle.check_by_id(check_id)
            tokens = normalize(record.text()) if record else []
            self._stem_cache[check_id] = set(tokens)
        return self._stem_cache[check_id]

    def pair_payload(self, pair, with_text: bool = True) -> dict:
        out = pair.to_dict()
        if with_text:
            rec_a = self.bundle.check_by_id(pair.id_a)
            rec_b = self.bundle.check_by_id(pair.id_b)
            out["text_a"] = rec_a.text() if rec_a else ""
            out["text_b"] = rec_b.text() if rec_b else ""
            out["shared_stems"] = sorted(self.stems(pair.id_a) & self.stems(pair.id_b))
        return out

    def whatif_cell(self, t: float, label_mode: str, pass_threshold: float) -> dict:
        scores = self.bundle.scores
        total = self.state.total
        trimmed = blocked = fails = 0
        for check_id in self.state.check_ids:
            if check_id in self.state.removed:
                continue
            s = scores.get(check_id)
            if s is None:
                continue
            p = s.p_pass.get(label_mode)
            if p is None:
                raise HTTPException(400, f"label mode {label_mode!r} has no scores")
            if p < pass_threshold:
                fails += 1
            elif s.severity < t:
                trimmed += 1
            else:
                blocked += 1
        removed = len(self.state.removed)

        def pct(n: int) -> float:
            return 100.0 * n / total if total else 0.0

        return {
            "severity_t": t,
            "label_mode": label_mode,
            "pass_threshold": pass_threshold,
            "trimmed_pct": pct(trimmed),
            "blocked_pct": pct(blocked),
            "fail_pct": pct(fails),
            "duplicate_removed_pct": pct(removed),
            "active": self.state.active_count,
            "total": total,
        }

    def decisions(self) -> list[dict]:
        scores = self.bundle.scores
        thresholds = self.state.thresholds
        bounds = PriorityBounds()
        out = []
        for check_id in self.state.check_ids:
            s = scores.get(check_id)
            if s is None:
                continue
            p = s.p_pass.get(thresholds.label_mode)
            if p is None:
                continue
            if check_id in self.state.removed:
                reason, throttled = "excluded_duplicate", False
            elif p < thresholds.pass_threshold:
                reason, throttled = "predicted_fail", False
            elif s.severity >= thresholds.severity_t:
                reason, throttled = "blocked_by_severity", False
            else:
                reason, throttled = "throttled", True
            out.append({
                "check_id": check_id,
                "p_pass": p,
                "severity_score": s.severity,
                "priority": assign_priority(p, bounds).value,
                "gap_band": in_gap_band(p, bounds),
                "throttled": throttled,
                "reason": reason,
            })
        return out

    def state_payload(self) -> dict:
        pending = 0
        if self.state.pairs is not None:
            pending = sum(1 for p in self.state.pairs.values() if p.decision == "pending")
        return {
            "total": self.state.total,
            "active": self.state.active_count,
            "removed": len(self.state.removed),
            "pairs_loaded": self.state.pairs is not None,
            "scores_loaded": self.bundle.scores is not None,
            "pending_pairs": pending,
            "severity_t": self.state.thresholds.severity_t,
            "pass_threshold": self.state.thresholds.pass_threshold,
            "label_mode": self.state.thresholds.label_mode,
            "last_seq": self.log.last_seq,
        }

    def maybe_snapshot(self) -> None:
        if self.snapshot_every > 0 and self.log.last_seq % self.snapshot_every == 0:
            write_snapshot(self.bundle.data_dir, self.state.snapshot_dict())


def create_app(data_dir=None, bundle: DataBundle | None = None,
               snapshot_every: int = 100, console_dir=None) -> FastAPI:
    if bundle is None:
        if data_dir is None:
            raise ValueError("create_app needs a data_dir or a bundle")
        bundle = load_bundle(data_dir)
    log = DecisionLog(bundle.data_dir / LOG_FILE)
    state = replay([c.id for c in bundle.checks], bundle.pairs, log,
                   thresholds=Thresholds(**vars(bundle.thresholds)),
                   snapshot=load_snapshot(bundle.data_dir))
    service = ReviewService(bundle, log, state, snapshot_every=snapshot_every)

    app = FastAPI(title="audit-triage review service", version="1")
    app.state.service = service

    @app.get("/v1/state")
    def get_state():
        return service.state_payload()

    @app.get("/v1/checks/{check_id}")
    def get_check(check_id: str):
        record = bundle.check_by_id(check_id)
        if record is None:
            raise HTTPException(404, f"unknown check {check_id!r}")
        from ..corpus import record_to_dict
        payload = record_to_dict(record)
        payload["removed"] = check_id in service.state.removed
        return payload

    @app.get("/v1/pairs")
    def get_pairs(tier: str | None = None, decision: str | None = None,
                  page: str | None = None, page_size: str | None = None):
        if service.state.pairs is None:
            raise HTTPException(409, "no duplicate-detection results are loaded")
        if tier is not None and tier not in TIER_LABELS:
            raise HTTPException(400, f"tier must be one of {TIER_LABELS}")
        if decision is not None and decision not in DECISION_STATES:
            raise HTTPException(400, f"decision must be one of {DECISION_STATES}")
        page_num = _parse_int(page, "page", 1, 1)
        size = _parse_int(page_size, "page_size", 50, 1)

        pairs = sorted(service.state.pairs.values(),
                       key=lambda p: (-p.similarity, p.id_a, p.id_b))
        if tier is not None:
            pairs = [p for p in pairs if p.tier == Tier.from_label(tier)]
        if decision is not None:
            pairs = [p for p in pairs if p.decision == decision]
        total = len(pairs)
        start = (page_num - 1) * size
        items = [service.pair_payload(p) for p in pairs[start:start + size]]
        next_page = page_num + 1 if start + size < total else None
        return {"items": items, "total": total, "page": page_num,
                "page_size": size, "next_page": next_page}

    @app.post("/v1/pairs/{id_a}/{id_b}/decision")
    def post_decision(id_a: str, id_b: str, body: DecisionBody):
        if service.state.pairs is None:
            raise HTTPException(409, "no duplicate-detection results are loaded")
        if body.decision not in ("accept", "reject"):
            raise HTTPException(400, "decision must be 'accept' or 'reject'")
        with service.lock:
            pair = service.state.pair(id_a, id_b)
            if pair is None:
                raise HTTPException(404, f"unknown pair ({id_a!r}, {id_b!r})")
            wanted = "accepted" if body.decision == "accept" else "rejected"
            if pair.decision != "pending":
                if pair.decision == wanted:
                    return {"pair": service.pair_payload(pair),
                            "active": service.state.active_count,
                            "total": service.state.total,
                            "removed_total": len(service.state.removed)}
                raise HTTPException(409, f"pair already decided: {pair.decision}")
            action = "accept_pair" if body.decision == "accept" else "reject_pair"
            entry = service.log.append(action, {"id_a": pair.id_a, "id_b": pair.id_b},
                                       actor=body.actor)
            service.state.apply(entry)
            service.maybe_snapshot()
            return {"pair": service.pair_payload(pair),
                    "active": service.state.active_count,
                    "total": service.state.total,
                    "removed_total": len(service.state.removed)}

    @app.get("/v1/whatif")
    def get_whatif(t: str | None = None, label: str | None = None,
                   pass_threshold: str | None = None):
        if bundle.scores is None:
            raise HTTPException(409, "no model scores are loaded")
        thresholds = service.state.thresholds
        t_value = _parse_float(t, "t", thresholds.severity_t)
        pt = _parse_float(pass_threshold, "pass_threshold", thresholds.pass_threshold)
        label_mode = label or thresholds.label_mode
        if label_mode not in LABEL_MODES:
            raise HTTPException(400, f"label must be one of {LABEL_MODES}")
        return service.whatif_cell(t_value, label_mode, pt)

    @app.get("/v1/priorities")
    def get_priorities(level: str | None = None):
        if bundle.scores is None:
            raise HTTPException(409, "no model scores are loaded")
        if level is not None and level not in PRIORITY_LEVELS:
            raise HTTPException(400, f"level must be one of {PRIORITY_LEVELS}")
        rows = service.decisions()
        if level is not None:
            rows = [r for r in rows if r["priority"] == level]
        rows.sort(key=lambda r: (r["p_pass"], r["check_id"]))
        return {"items": rows, "total": len(rows), "level": level}

    @app.post("/v1/thresholds")
    def post_thresholds(body: ThresholdBody):
        payload: dict = {}
        if body.severity_t is not None:
            if not (0.0 <= body.severity_t <= 1.0):
                raise HTTPException(400, f"severity_t {body.severity_t} outside [0, 1]")
            payload["severity_t"] = body.severity_t
        if body.pass_threshold is not None:
            if not (0.0 <= body.pass_threshold <= 1.0):
                raise HTTPException(400, f"pass_threshold {body.pass_threshold} outside [0, 1]")
            payload["pass_threshold"] = body.pass_threshold
        if body.label_mode is not None:
            if body.label_mode not in LABEL_MODES:
                raise HTTPException(400, f"label_mode must be one of {LABEL_MODES}")
            payload["label_mode"] = body.label_mode
        if not payload:
            raise HTTPException(400, "no threshold fields supplied")
        with service.lock:
            entry = service.log.append("set_threshold", payload, actor=body.actor)
            service.state.apply(entry)
            service.maybe_snapshot()
            t = service.state.thresholds
            return {"severity_t": t.severity_t, "pass_threshold": t.pass_threshold,
                    "label_mode": t.label_mode, "seq": entry.seq}

    if console_dir is not None and Path(console_dir).exists():
        app.mount("/console", StaticFiles(directory=console_dir, html=True), name="console")

    return app
