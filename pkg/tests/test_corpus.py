import json

import pytest

from audit_triage.corpus import (CheckRecord, load_checks, save_checks,
                                 split_train_test)
from audit_triage.errors import CorpusFormatError, DuplicateIdError
from audit_triage.synth import CorpusSpec, synthesize_corpus


def _rows():
    return [
        {"id": "C-1", "asset_type": "belt conveyor", "vendor": "AcmeCo", "site": "FC-01",
         "checklist_text": "verify belt tracking", "focus_points": "belt",
         "criticality": "high", "severity_score": 0.4, "severity_group": "conveyor-mech",
         "ioq_status": "pass", "vq_status": "pass"},
        {"id": "C-2", "asset_type": "control panel", "vendor": "Veltrix",
         "checklist_text": "inspect breaker torque", "ioq_status": "fail"},
        {"id": "C-3", "asset_type": "fire pump", "vendor": "Macrodyne",
         "checklist_text": "confirm gauge pressure"},
    ]


def _write_jsonl(path, rows):
    path.write_text("\n".join(json.dumps(r) for r in rows) + "\n", "utf-8")


class TestLoadChecks:
    def test_loads_valid_rows(self, tmp_path):
        path = tmp_path / "checks.jsonl"
        _write_jsonl(path, _rows())
        result = load_checks(path)
        assert len(result.records) == 3 and result.dropped == 0
        assert result.records[0].severity_score == 0.4
        assert result.records[1].site is None
        assert result.records[2].ioq_status is None

    def test_csv_ingest(self, tmp_path):
        path = tmp_path / "checks.csv"
        path.write_text(
            "id,asset_type,vendor,site,checklist_text,focus_points,criticality,"
            "severity_score,severity_group,ioq_status,vq_status\n"
            "C-1,belt conveyor,AcmeCo,FC-01,verify belt tracking,belt,high,0.4,,pass,fail\n"
            "C-2,control panel,Veltrix,,inspect breaker torque,,,,,fail,\n",
            "utf-8")
        result = load_checks(path)
        assert [r.id for r in result.records] == ["C-1", "C-2"]
        assert result.records[0].vq_status == "fail"
        assert result.records[1].site is None and result.records[1].severity_score is None

    def test_blank_checklist_rows_dropped_and_counted(self, tmp_path):
        rows = _rows()
        rows[1]["checklist_text"] = "   "
        path = tmp_path / "checks.jsonl"
        _write_jsonl(path, rows)
        result = load_checks(path)
        assert len(result.records) == 2 and result.dropped == 1

    def test_duplicate_id_names_the_offender(self, tmp_path):
        rows = _rows()
        rows[2]["id"] = "C-7"
        rows[1]["id"] = "C-7"
        path = tmp_path / "checks.jsonl"
        _write_jsonl(path, rows)
        with pytest.raises(DuplicateIdError) as exc:
            load_checks(path)
        assert "C-7" in str(exc.value)
        assert exc.value.record_id == "C-7"

    def test_unknown_column_rejected(self, tmp_path):
        rows = _rows()
        rows[0]["surprise"] = 1
        path = tmp_path / "checks.jsonl"
        _write_jsonl(path, rows)
        with pytest.raises(CorpusFormatError) as exc:
            load_checks(path)
        assert "surprise" in str(exc.value)

    def test_bad_status_value_rejected(self, tmp_path):
        rows = _rows()
        rows[0]["ioq_status"] = "maybe"
        path = tmp_path / "checks.jsonl"
        _write_jsonl(path, rows)
        with pytest.raises(CorpusFormatError):
            load_checks(path)

    def test_severity_score_range_checked(self, tmp_path):
        rows = _rows()
        rows[0]["severity_score"] = 1.5
        path = tmp_path / "checks.jsonl"
        _write_jsonl(path, rows)
        with pytest.raises(CorpusFormatError):
            load_checks(path)

    def test_missing_file_errors(self, tmp_path):
        with pytest.raises(OSError):
            load_checks(tmp_path / "nope.jsonl")

    def test_roundtrip_preserves_records(self, tmp_path):
        records, _ = synthesize_corpus(CorpusSpec(n_checks=80, fail_fraction=0.1,
                                                  n_duplicate_pairs=3, seed=9))
        path = tmp_path / "checks.jsonl"
        save_checks(records, path)
        loaded = load_checks(path).records
        assert loaded == records


class TestSplit:
    def _imbalanced(self):
        records = []
        for i in range(8):
            records.append(CheckRecord(id=f"P-{i}", asset_type="a", vendor="v",
                                       checklist_text="x", ioq_status="pass"))
        for i in range(2):
            records.append(CheckRecord(id=f"F-{i}", asset_type="a", vendor="v",
                                       checklist_text="x", ioq_status="fail"))
        return records

    def test_stratified_allocation_matches_enumeration(self):
        records = self._imbalanced()
        # oracle: enumerate allocations with both classes on both sides
        valid = [(p, f) for p in range(1, 8) for f in range(1, 2) if p + f == 8]
        assert valid == [(7, 1)]
        split = split_train_test(records, 0.8, seed=1)
        train_fail = sum(1 for r in split.train if r.ioq_status == "fail")
        train_pass = sum(1 for r in split.train if r.ioq_status == "pass")
        assert (train_pass, train_fail) == (7, 1)
        assert len(split.train) == 8 and train_fail >= 1

    def test_two_records(self):
        records = self._imbalanced()[:1] + self._imbalanced()[-1:]
        split = split_train_test(records, 0.5, seed=0)
        assert len(split.train) == 1 and len(split.test) == 1

    def test_deterministic(self):
        records = self._imbalanced()
        a = split_train_test(records, 0.8, seed=42)
        b = split_train_test(records, 0.8, seed=42)
        assert [r.id for r in a.train] == [r.id for r in b.train]
        assert [r.id for r in a.test] == [r.id for r in b.test]

    def test_disjoint_and_ratio_bounded(self):
        import numpy as np
        rng = np.random.default_rng(7)
        for _ in range(25):
            n = int(rng.integers(4, 120))
            records, _ = synthesize_corpus(CorpusSpec(
                n_checks=max(10, n), fail_fraction=float(rng.uniform(0.1, 0.5)),
                seed=int(rng.integers(1000))))
            fraction = float(rng.uniform(0.2, 0.9))
            split = split_train_test(records, fraction, seed=int(rng.integers(1000)))
            train_ids = {r.id for r in split.train}
            test_ids = {r.id for r in split.test}
            assert not (train_ids & test_ids)
            assert len(train_ids) + len(test_ids) == len(records)
            assert abs(len(split.train) - fraction * len(records)) <= 1.0

    def test_single_class_rejected(self):
        records = self._imbalanced()[:8]
        with pytest.raises(ValueError):
            split_train_test(records, 0.8, seed=0)

    def test_too_few_records_rejected(self):
        with pytest.raises(ValueError):
            split_train_test(self._imbalanced()[:1], 0.8, seed=0)

    def test_bad_fraction_rejected(self):
        with pytest.raises(ValueError):
            split_train_test(self._imbalanced(), 1.0, seed=0)
