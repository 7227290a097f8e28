"""Synthetic checklist corpus with planted structure for desk-scale runs.

The generator plants three kinds of ground truth so downstream stages are
verifiable without production data:

* labels correlate with cue tokens: failed checks always read like risk
  findings (two risk words split across checklist and focus point), while
  a small fraction of passing checks look risky too, which caps how well
  any classifier can do and keeps the learning task honest;
* exact-duplicate and paraphrase pairs are planted inside one
  (asset_type, vendor, site) block so pair detection has known answers;
* the ioq fail count is exact: floor(n_checks * fail_fraction).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corpus import CheckRecord, SeverityEvent

THEMES = {
    "conveyor": {
        "assets": ["belt conveyor", "roller conveyor", "spiral conveyor", "sortation wheel"],
        "components": ["belt", "roller", "motor", "gearbox", "bearing", "pulley",
                       "tensioner", "guard", "idler", "sprocket"],
        "extras": ["tracking", "alignment", "splice", "lacing", "takeup"],
    },
    "electrical": {
        "assets": ["control panel", "switchgear", "distribution board", "motor starter"],
        "components": ["breaker", "contactor", "relay", "busbar", "terminal", "conduit",
                       "enclosure", "fuse", "transformer", "wiring"],
        "extras": ["torque", "grounding", "insulation", "voltage", "labeling"],
    },
    "fire": {
        "assets": ["sprinkler riser", "fire pump", "alarm panel", "smoke curtain"],
        "components": ["sprinkler", "valve", "gauge", "detector", "nozzle", "hose",
                       "strainer", "impeller", "coupling", "sensor"],
        "extras": ["pressure", "flow", "signal", "zone", "supervision"],
    },
    "hvac": {
        "assets": ["air handler", "exhaust fan", "chiller", "rooftop unit"],
        "components": ["filter", "damper", "coil", "compressor", "blower", "thermostat",
                       "duct", "actuator", "condenser", "louver"],
        "extras": ["airflow", "setpoint", "refrigerant", "vibration", "balance"],
    },
    "racking": {
        "assets": ["pallet rack", "mezzanine", "cantilever rack", "pick module"],
        "components": ["upright", "beam", "brace", "anchor", "baseplate", "decking",
                       "guardrail", "column", "footplate", "shim"],
        "extras": ["plumb", "capacity", "deflection", "spacing", "clearance"],
    },
}

RISK_WORDS = ["corroded", "leaking", "misaligned", "frayed", "overheating", "cracked",
              "loose", "seized", "arcing", "obstructed", "worn", "jammed"]
PASS_WORDS = ["secure", "intact", "calibrated", "lubricated", "torqued", "labeled",
              "clean", "aligned"]

VENDORS = ["AcmeCo", "Macrodyne", "Veltrix", "NordBelt", "QuantumFab", "Sierra Industrial"]
SITES = ["FC-01", "FC-02", "FC-03", "FC-04", "FC-05", "FC-06"]

# one template pool for both outcomes: only the cue slots differ, so the
# label signal lives in cue tokens rather than in surface phrasing
_TEMPLATES = [
    "verify the {comp} on the {asset} is {s1} and {s2}",
    "inspect {asset} {comp} for {s1} {s2} condition before handoff",
    "confirm {comp} {s1} and {s2} status at the {asset}",
    "check that {asset} {comp} remains {s1} not {s2} during commissioning",
    "review {comp} installation on {asset} and record {s1} {s2} observations",
]
_RISKY_FOCUS = [
    "{comp2} {risk2}",
    "{risk2} at {comp2}",
    "{risk2} {comp2} recurring",
]
_CLEAN_FOCUS = [
    "{comp2} {extra2}",
    "{extra2} of {comp2}",
]


@dataclass(frozen=True)
class CorpusSpec:
    """Generator configuration for one synthetic corpus."""

    n_checks: int
    fail_fraction: float
    n_duplicate_pairs: int = 0
    n_paraphrase_pairs: int = 0
    vocab_themes: tuple[str, ...] | None = None
    seed: int = 0
    risky_pass_rate: float = 0.10   # passing checks that still read like findings
    clean_risk_noise: float = 0.25  # clean checks mentioning a risk word in passing


@dataclass
class GroundTruth:
    """Planted structure emitted alongside a synthetic corpus."""

    duplicate_pairs: list[tuple[str, str]] = field(default_factory=list)
    paraphrase_pairs: list[tuple[str, str]] = field(default_factory=list)
    fail_cues: list[str] = field(default_factory=list)
    pass_cues: list[str] = field(default_factory=list)
    risk_flagged_ids: set[str] = field(default_factory=set)


def _validate(spec: CorpusSpec) -> list[str]:
    if spec.n_checks < 10:
        raise ValueError(f"n_checks must be >= 10, got {spec.n_checks}")
    if not (0.0 < spec.fail_fraction < 1.0):
        raise ValueError(f"fail_fraction must be in (0, 1), got {spec.fail_fraction}")
    if spec.n_duplicate_pairs < 0 or spec.n_paraphrase_pairs < 0:
        raise ValueError("pair counts must be non-negative")
    n_pairs = spec.n_duplicate_pairs + spec.n_paraphrase_pairs
    if 2 * n_pairs > spec.n_checks:
        raise ValueError(f"{n_pairs} planted pairs do not fit in {spec.n_checks} checks")
    themes = list(spec.vocab_themes) if spec.vocab_themes else sorted(THEMES)
    unknown = [t for t in themes if t not in THEMES]
    if unknown:
        raise ValueError(f"unknown vocab themes {unknown}; known: {sorted(THEMES)}")
    return themes


def _pick(rng: np.random.Generator, items):
    return items[int(rng.integers(len(items)))]


def _pick2(rng: np.random.Generator, items):
    i, j = rng.choice(len(items), size=2, replace=False)
    return items[int(i)], items[int(j)]


def _render_check_text(rng, theme, risky, noisy, slots=None, template_shift=0):
    """Render (checklist_text, focus_points, slots) for one record.

    Passing ``slots`` reuses another record's content words, which is how
    paraphrase clones keep high lexical overlap; ``template_shift`` picks a
    different surface form.
    """
    vocab = THEMES[theme]
    if slots is None:
        comp, comp2 = _pick2(rng, vocab["components"])
        risk, risk2 = _pick2(rng, RISK_WORDS)
        slots = {
            "asset_words": _pick(rng, vocab["assets"]),
            "comp": comp, "comp2": comp2,
            "risk": risk, "risk2": risk2,
            "passcue": _pick(rng, PASS_WORDS),
            "extra": _pick(rng, vocab["extras"]),
            "extra2": _pick(rng, vocab["extras"]),
        }
    fmt = dict(slots, asset=slots["asset_words"])
    if risky:
        fmt["s1"] = slots["risk"]
        draw = rng.random()
        # risk words co-occur: half the time the second slot is another risk word
        fmt["s2"] = slots["risk2"] if draw < 0.5 else (
            slots["passcue"] if draw < 0.7 else slots["extra"])
    elif noisy:
        fmt["s1"] = slots["risk"]
        fmt["s2"] = slots["passcue"]
    else:
        fmt["s1"] = slots["passcue"]
        fmt["s2"] = slots["extra"]
    t = (int(rng.integers(len(_TEMPLATES))) + template_shift) % len(_TEMPLATES)
    text = _TEMPLATES[t].format(**fmt)
    if risky:
        f = (int(rng.integers(len(_RISKY_FOCUS))) + template_shift) % len(_RISKY_FOCUS)
        focus = _RISKY_FOCUS[f].format(**fmt)
    elif rng.random() < 0.2:
        focus = ""
    else:
        f = (int(rng.integers(len(_CLEAN_FOCUS))) + template_shift) % len(_CLEAN_FOCUS)
        focus = _CLEAN_FOCUS[f].format(**fmt)
    return text, focus, slots


def _assign_fail_groups(rng, groups: list[tuple[int, ...]], n_fail: int) -> set[int]:
    """Mark whole clone-groups as failed until the exact count is reached."""
    order = rng.permutation(len(groups))
    failed: set[int] = set()
    remaining = n_fail
    for gi in order:
        group = groups[int(gi)]
        if len(group) <= remaining:
            failed.update(group)
            remaining -= len(group)
        if remaining == 0:
            break
    if remaining != 0:
        raise ValueError(
            "cannot hit the exact fail count: too few singleton records "
            f"(short by {remaining})"
        )
    return failed


def synthesize_corpus(spec: CorpusSpec) -> tuple[list[CheckRecord], GroundTruth]:
    """Generate a deterministic corpus and its planted annotations."""
    themes = _validate(spec)
    rng = np.random.default_rng(spec.seed)

    n_pairs = spec.n_duplicate_pairs + spec.n_paraphrase_pairs
    n_base = spec.n_checks - n_pairs
    clone_bases = (
        sorted(int(i) for i in rng.choice(n_base, size=n_pairs, replace=False))
        if n_pairs else []
    )
    dup_bases = set(clone_bases[: spec.n_duplicate_pairs])

    # groups tie a base record to its clone so labels stay consistent
    clone_index = {b: n_base + k for k, b in enumerate(clone_bases)}
    groups: list[tuple[int, ...]] = []
    for i in range(n_base):
        if i in clone_index:
            groups.append((i, clone_index[i]))
        else:
            groups.append((i,))

    n_fail = int(spec.n_checks * spec.fail_fraction)
    failed = _assign_fail_groups(rng, groups, n_fail)

    def make_id(i: int) -> str:
        return f"CHK-{i + 1:06d}"

    truth = GroundTruth(fail_cues=list(RISK_WORDS), pass_cues=list(PASS_WORDS))
    records: list[CheckRecord] = [None] * spec.n_checks  # type: ignore[list-item]
    base_slots: dict[int, dict] = {}
    base_theme: dict[int, str] = {}
    base_risky: dict[int, bool] = {}

    for i in range(n_base):
        theme = _pick(rng, themes)
        is_fail = i in failed
        risky = is_fail or (rng.random() < spec.risky_pass_rate)
        noisy = (not risky) and (rng.random() < spec.clean_risk_noise)
        text, focus, slots = _render_check_text(rng, theme, risky, noisy)

        if risky:
            criticality = _pick(rng, ["high"] * 11 + ["medium"] * 6 + ["low"] * 3)
            vq = "fail" if rng.random() < (0.7 if is_fail else 0.5) else "pass"
            sev = float(0.3 + 0.7 * rng.random()) if rng.random() < 0.8 else None
        else:
            criticality = _pick(rng, ["high"] * 3 + ["medium"] * 9 + ["low"] * 8)
            vq = "pass" if rng.random() < 0.95 else "fail"
            sev = float(0.4 * rng.random()) if rng.random() < 0.8 else None
        if rng.random() < 0.05:
            vq = None

        rec = CheckRecord(
            id=make_id(i),
            asset_type=slots["asset_words"],
            vendor=_pick(rng, VENDORS),
            site=_pick(rng, SITES),
            checklist_text=text,
            focus_points=focus,
            criticality=criticality,
            severity_score=sev,
            severity_group=f"{theme}-{_pick(rng, ['mech', 'struct', 'process'])}"
            if rng.random() < 0.7 else None,
            ioq_status="fail" if is_fail else "pass",
            vq_status=vq,
        )
        records[i] = rec
        base_slots[i] = slots
        base_theme[i] = theme
        base_risky[i] = risky
        if risky:
            truth.risk_flagged_ids.add(rec.id)

    for base_i in clone_bases:
        clone_i = clone_index[base_i]
        source = records[base_i]
        exact = base_i in dup_bases
        if exact:
            text, focus = source.checklist_text, source.focus_points
        else:
            text, focus, _ = _render_check_text(
                rng, base_theme[base_i], base_risky[base_i], noisy=False,
                slots=base_slots[base_i], template_shift=1 + int(rng.integers(2)),
            )
        clone = CheckRecord(
            id=make_id(clone_i),
            asset_type=source.asset_type,
            vendor=source.vendor,
            site=source.site,
            checklist_text=text,
            focus_points=focus,
            criticality=source.criticality,
            severity_score=source.severity_score,
            severity_group=source.severity_group,
            ioq_status=source.ioq_status,
            vq_status=source.vq_status,
        )
        records[clone_i] = clone
        pair = (source.id, clone.id)
        if exact:
            truth.duplicate_pairs.append(pair)
        else:
            truth.paraphrase_pairs.append(pair)
        if base_risky[base_i]:
            truth.risk_flagged_ids.add(clone.id)

    return records, truth


def synthesize_severity_events(n_events: int = 60, themes=None, seed: int = 0) -> list[SeverityEvent]:
    """Incident descriptions that share vocabulary with risk-flagged checks."""
    theme_names = list(themes) if themes else sorted(THEMES)
    unknown = [t for t in theme_names if t not in THEMES]
    if unknown:
        raise ValueError(f"unknown vocab themes {unknown}")
    rng = np.random.default_rng(seed)
    templates = [
        "{comp} {risk} caused unplanned stoppage at {asset}",
        "{asset} shutdown after {risk} {comp} was reported",
        "injury near {asset} traced to {risk} {comp}",
        "{risk} {comp} on {asset} led to property damage",
    ]
    events = []
    for i in range(n_events):
        theme = _pick(rng, theme_names)
        vocab = THEMES[theme]
        text = _pick(rng, templates).format(
            comp=_pick(rng, vocab["components"]),
            risk=_pick(rng, RISK_WORDS),
            asset=_pick(rng, vocab["assets"]),
        )
        events.append(SeverityEvent(id=f"SEV-{i + 1:04d}", description=text))
    return events
