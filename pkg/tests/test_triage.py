import csv

import numpy as np
import pytest

from audit_triage.corpus import CheckRecord
from audit_triage.dedup import DuplicatePair, Tier, dedup_report
from audit_triage.severity import SeverityScore
from audit_triage.triage import (Priority, PriorityBounds, Reason, TriageConfig,
                                 assign_priority, decide, in_gap_band, removed_ids,
                                 run_triage, summary_report, sweep_to_csv,
                                 triage_check, whatif_sweep)


class TestAssignPriority:
    @pytest.mark.parametrize("p,level", [
        (0.95, Priority.LEVEL1), (0.901, Priority.LEVEL1),
        (0.90, Priority.LEVEL2), (0.85, Priority.LEVEL2), (0.791, Priority.LEVEL2),
        (0.79, Priority.LEVEL3), (0.75, Priority.LEVEL3), (0.60, Priority.LEVEL3),
        (0.0, Priority.LEVEL3), (1.0, Priority.LEVEL1),
    ])
    def test_band_edges(self, p, level):
        assert assign_priority(p) == level

    def test_gap_band_flagged(self):
        assert in_gap_band(0.75)
        assert not in_gap_band(0.72)
        assert in_gap_band(0.7899)
        assert not in_gap_band(0.85)

    def test_total_and_monotone(self):
        grid = np.linspace(0.0, 1.0, 2001)
        levels = [assign_priority(float(p)) for p in grid]
        order = {Priority.LEVEL3: 0, Priority.LEVEL2: 1, Priority.LEVEL1: 2}
        ranks = [order[l] for l in levels]
        assert ranks == sorted(ranks)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            assign_priority(1.2)

    def test_bounds_validation(self):
        with pytest.raises(ValueError):
            PriorityBounds(level1_min=0.5, level2_min=0.8)


def _sev(score, cluster=0):
    return SeverityScore(check_id="x", score=score, nearest_cluster=cluster)


class TestDecide:
    def test_all_gates_pass(self):
        d = decide("c", 0.97, _sev(0.10), TriageConfig(), removed=set())
        assert d.throttled and d.reason == Reason.THROTTLED

    def test_severity_blocks(self):
        d = decide("c", 0.97, _sev(0.80), TriageConfig(), removed=set())
        assert not d.throttled and d.reason == Reason.BLOCKED_BY_SEVERITY

    def test_predicted_fail(self):
        d = decide("c", 0.20, _sev(0.0), TriageConfig(), removed=set())
        assert d.reason == Reason.PREDICTED_FAIL
        assert d.priority == Priority.LEVEL3

    def test_removed_duplicate_wins(self):
        d = decide("c", 0.99, _sev(0.0), TriageConfig(), removed={"c"})
        assert d.reason == Reason.EXCLUDED_DUPLICATE and not d.throttled

    def test_invariant_on_grid(self):
        cfg = TriageConfig(pass_threshold=0.5, severity_t=0.5)
        for p in np.linspace(0, 1, 21):
            for s in np.linspace(0, 1, 21):
                d = decide("c", float(p), _sev(float(s)), cfg, removed=set())
                if d.throttled:
                    assert p >= cfg.pass_threshold
                    assert s < cfg.severity_t
                    assert d.reason == Reason.THROTTLED


class _StubClassifier:
    """Deterministic scores keyed by record id."""

    def __init__(self, scores):
        self.scores = scores

    def predict_proba(self, records):
        return np.array([self.scores[r.id] for r in records])

    def predict_proba_one(self, record):
        return self.scores[record.id]


class _StubSeverityModel:
    def __init__(self, scores):
        self.scores = scores
        self.centroids = np.ones((1, 2))
        self.center = np.zeros(2)
        self.prep = None
        self.embedding = None


@pytest.fixture
def stub_world(monkeypatch):
    records = [CheckRecord(id=f"c{i}", asset_type="a", vendor="v", site="s",
                           checklist_text=f"text {i}", ioq_status="pass")
               for i in range(10)]
    p_scores = {r.id: 0.05 + 0.1 * i for i, r in enumerate(records)}
    sev_scores = {r.id: (0.9 if i % 3 == 0 else 0.2) for i, r in enumerate(records)}
    import audit_triage.triage as triage_mod

    def fake_severity_score(record, model):
        return SeverityScore(check_id=record.id, score=sev_scores[record.id],
                             nearest_cluster=0)

    monkeypatch.setattr(triage_mod, "severity_score", fake_severity_score)
    return records, _StubClassifier(p_scores), _StubSeverityModel(sev_scores), sev_scores


class TestRunTriage:
    def test_decisions_cover_every_check(self, stub_world):
        records, clf, sev, _ = stub_world
        decisions = run_triage(records, TriageConfig(), clf, sev)
        assert [d.check_id for d in decisions] == [r.id for r in records]
        counts = {}
        for d in decisions:
            counts[d.reason] = counts.get(d.reason, 0) + 1
        assert sum(counts.values()) == len(records)

    def test_triage_check_single(self, stub_world):
        records, clf, sev, _ = stub_world
        d = triage_check(records[9], TriageConfig(), clf, sev)
        assert d.check_id == "c9" and d.p_pass == pytest.approx(0.95)
        assert d.reason == Reason.BLOCKED_BY_SEVERITY  # c9 has severity 0.9

    def test_accepted_pair_excludes_loser(self, stub_world):
        records, clf, sev, _ = stub_world
        pair = DuplicatePair(id_a="c8", id_b="c9", similarity=0.95,
                             tier=Tier.IDENTICAL, decision="accepted")
        decisions = run_triage(records, TriageConfig(), clf, sev, duplicate_pairs=[pair])
        by_id = {d.check_id: d for d in decisions}
        assert by_id["c9"].reason == Reason.EXCLUDED_DUPLICATE
        assert by_id["c8"].reason != Reason.EXCLUDED_DUPLICATE

    def test_unknown_pair_id_rejected(self, stub_world):
        records, clf, sev, _ = stub_world
        pair = DuplicatePair(id_a="c8", id_b="zz", similarity=0.9,
                             tier=Tier.IDENTICAL, decision="accepted")
        with pytest.raises(ValueError):
            run_triage(records, TriageConfig(), clf, sev, duplicate_pairs=[pair])

    def test_missing_models_rejected(self, stub_world):
        records, clf, sev, _ = stub_world
        with pytest.raises(ValueError):
            run_triage(records, TriageConfig(), None, sev)


class TestRemovedIds:
    def test_accepted_removes_larger_id(self):
        pairs = [DuplicatePair(id_a="a", id_b="b", similarity=0.9,
                               tier=Tier.IDENTICAL, decision="accepted")]
        assert removed_ids(pairs) == {"b"}

    def test_pending_and_rejected_remove_nothing(self):
        pairs = [
            DuplicatePair(id_a="a", id_b="b", similarity=0.9, tier=Tier.IDENTICAL),
            DuplicatePair(id_a="c", id_b="d", similarity=0.9, tier=Tier.IDENTICAL,
                          decision="rejected"),
        ]
        assert removed_ids(pairs) == set()

    def test_overlapping_accepts_remove_once(self):
        pairs = [
            DuplicatePair(id_a="a", id_b="b", similarity=0.9, tier=Tier.IDENTICAL,
                          decision="accepted"),
            DuplicatePair(id_a="b", id_b="c", similarity=0.9, tier=Tier.IDENTICAL,
                          decision="accepted"),
        ]
        assert removed_ids(pairs) == {"b", "c"}


class TestWhatifSweep:
    def test_gate_extremes(self, stub_world):
        records, clf, sev, _ = stub_world
        cfg = TriageConfig()
        cells = whatif_sweep(records, cfg, {"throttled": clf}, sev,
                             t_values=[0.0, 1.0], label_modes=["throttled"])
        by_t = {c.severity_t: c for c in cells}
        assert by_t[0.0].trimmed_pct == 0.0
        passing = sum(1 for r in records if clf.scores[r.id] >= cfg.pass_threshold)
        assert by_t[1.0].trimmed_pct == pytest.approx(100.0 * passing / len(records))
        assert by_t[1.0].blocked_pct == 0.0

    def test_monotone_in_threshold(self, stub_world):
        records, clf, sev, _ = stub_world
        ts = [i / 10 for i in range(11)]
        cells = whatif_sweep(records, TriageConfig(), {"throttled": clf}, sev,
                             t_values=ts, label_modes=["throttled"])
        trimmed = [c.trimmed_pct for c in cells]
        assert trimmed == sorted(trimmed)

    def test_cells_sum_to_hundred(self, stub_world):
        records, clf, sev, _ = stub_world
        pair = DuplicatePair(id_a="c0", id_b="c1", similarity=0.99,
                             tier=Tier.IDENTICAL, decision="accepted")
        cells = whatif_sweep(records, TriageConfig(), {"throttled": clf}, sev,
                             t_values=[0.3, 0.7], label_modes=["throttled"],
                             duplicate_pairs=[pair])
        for cell in cells:
            total = cell.trimmed_pct + cell.blocked_pct + cell.fail_pct + cell.excluded_pct
            assert total == pytest.approx(100.0, abs=1e-9)
            assert cell.excluded_pct == pytest.approx(10.0)

    def test_empty_t_values_rejected(self, stub_world):
        records, clf, sev, _ = stub_world
        with pytest.raises(ValueError):
            whatif_sweep(records, TriageConfig(), {"throttled": clf}, sev, t_values=[])

    def test_missing_mode_classifier_rejected(self, stub_world):
        records, clf, sev, _ = stub_world
        with pytest.raises(ValueError):
            whatif_sweep(records, TriageConfig(), {"throttled": clf}, sev,
                         t_values=[0.5], label_modes=["ioq_only"])

    def test_csv_export(self, stub_world, tmp_path):
        records, clf, sev, _ = stub_world
        cells = whatif_sweep(records, TriageConfig(), {"throttled": clf}, sev,
                             t_values=[0.2, 0.8], label_modes=["throttled"])
        path = tmp_path / "sweep.csv"
        sweep_to_csv(cells, path)
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 2
        assert float(rows[0]["severity_t"]) == 0.2


class TestSummaryReport:
    def test_combined_reduction_counts_each_check_once(self, stub_world):
        records, clf, sev, sev_scores = stub_world
        # force a known decision mix: 10 removed dups, 20 throttled, 70 other
        decisions = []
        for i in range(100):
            if i < 10:
                reason, throttled = Reason.EXCLUDED_DUPLICATE, False
            elif i < 30:
                reason, throttled = Reason.THROTTLED, True
            else:
                reason, throttled = Reason.PREDICTED_FAIL, False
            decisions.append(decide(f"c{i}", 0.99 if throttled else 0.1,
                                    _sev(0.0), TriageConfig(),
                                    removed={f"c{i}"} if reason == Reason.EXCLUDED_DUPLICATE
                                    else set()))
        report = summary_report(decisions)
        assert report.total == 100
        assert report.combined_reduction_pct == pytest.approx(30.0)
        assert sum(report.reason_counts.values()) == 100

    def test_dedup_only_report(self):
        records = [CheckRecord(id=f"c{i}", asset_type="a", vendor="v", site="s",
                               checklist_text="same text here")
                   for i in range(4)]
        dreport = dedup_report(records)
        report = summary_report([], dedup=dreport)
        assert report.total == 0
        assert report.dedup is not None
        assert report.dedup["categories"]["Identical"]["number"] == 4

    def test_priority_histogram_populated(self, stub_world):
        records, clf, sev, _ = stub_world
        decisions = run_triage(records, TriageConfig(), clf, sev)
        report = summary_report(decisions)
        assert sum(report.priority_histogram.values()) == len(records)


def test_config_validation():
    with pytest.raises(ValueError):
        TriageConfig(label_mode="both")
    with pytest.raises(ValueError):
        TriageConfig(pass_threshold=1.5)
