import pytest

from audit_triage.corpus import CheckRecord
from audit_triage.dedup import (DuplicatePair, Tier, TierBounds, block_key,
                                classify_tier, dedup_report, find_pairs, load_pairs,
                                pair_candidates, save_pairs, score_pair)
from audit_triage.synth import CorpusSpec, synthesize_corpus
from audit_triage.textprep import TokenList, build_vocabulary, normalize


def _record(rid, asset="Conveyor", vendor="AcmeCo", site="FC-12",
            text="inspect belt tension", focus=""):
    return CheckRecord(id=rid, asset_type=asset, vendor=vendor, site=site,
                       checklist_text=text, focus_points=focus)


class TestBlockKey:
    def test_normalized_triple(self):
        key = block_key(_record("a"))
        assert key == ("conveyor", "acmeco", "fc-12")

    def test_missing_site_sentinel(self):
        key = block_key(_record("a", site=None))
        assert key.site == "∅"
        other = block_key(CheckRecord(id="b", asset_type="Conveyor", vendor="AcmeCo",
                                      checklist_text="x", site="  "))
        assert other.site == "∅"

    def test_site_difference_splits_blocks(self):
        assert block_key(_record("a", site="FC-1")) != block_key(_record("b", site="FC-2"))

    def test_case_and_whitespace_insensitive(self):
        assert block_key(_record("a", asset=" CONVEYOR ", vendor="acmeCo ")) == \
            block_key(_record("b"))


class TestPairCandidates:
    def test_block_of_four_gives_six_pairs(self):
        records = [_record(f"r{i}") for i in range(4)]
        assert len(list(pair_candidates(records))) == 6

    def test_two_blocks(self):
        records = [_record(f"a{i}") for i in range(3)]
        records += [_record(f"b{i}", site="FC-99") for i in range(2)]
        assert len(list(pair_candidates(records))) == 3 + 1

    def test_singleton_blocks_give_nothing(self):
        records = [_record(f"r{i}", site=f"FC-{i}") for i in range(5)]
        assert list(pair_candidates(records)) == []

    def test_no_cross_block_pairs_on_synthetic_corpus(self):
        records, _ = synthesize_corpus(CorpusSpec(n_checks=300, fail_fraction=0.1,
                                                  n_duplicate_pairs=10, seed=2))
        for a, b in pair_candidates(records):
            assert block_key(a) == block_key(b)


def _vocab_for(records):
    lists = [normalize(r.text(), source_id=r.id) for r in records]
    return build_vocabulary(lists, min_count=1)


class TestScorePair:
    def test_identical_text_scores_one(self):
        a = _record("a", text="inspect belt tension weekly")
        b = _record("b", text="inspect belt tension weekly")
        assert score_pair(a, b, _vocab_for([a, b])) == pytest.approx(1.0, abs=1e-12)

    def test_reworded_duplicate_scores_high(self):
        a = _record("a", text="All breakers in panel are visually damage free")
        b = _record("b", text="Breaker is visually free of damage")
        assert score_pair(a, b, _vocab_for([a, b])) >= 0.85

    def test_disjoint_text_scores_zero(self):
        a = _record("a", text="inspect belt tension")
        b = _record("b", text="confirm sprinkler pressure")
        assert score_pair(a, b, _vocab_for([a, b])) == 0.0

    def test_cross_block_pair_rejected(self):
        a = _record("a", site="FC-1")
        b = _record("b", site="FC-2")
        with pytest.raises(ValueError):
            score_pair(a, b, _vocab_for([a, b]))

    def test_symmetry_and_self_similarity(self):
        records, _ = synthesize_corpus(CorpusSpec(n_checks=60, fail_fraction=0.1, seed=8))
        vocab = _vocab_for(records)
        by_block: dict = {}
        for r in records:
            by_block.setdefault(block_key(r), []).append(r)
        checked = 0
        for block in by_block.values():
            for i, a in enumerate(block):
                assert score_pair(a, a, vocab) == pytest.approx(1.0, abs=1e-12)
                for b in block[i + 1:]:
                    assert score_pair(a, b, vocab) == score_pair(b, a, vocab)
                    checked += 1
        assert checked > 0

    def test_focus_points_participate(self):
        a = _record("a", text="inspect belt", focus="tensioner wear")
        b = _record("b", text="inspect belt", focus="tensioner wear")
        c = _record("c", text="inspect belt", focus="motor alignment")
        vocab = _vocab_for([a, b, c])
        assert score_pair(a, b, vocab) > score_pair(a, c, vocab)


class TestClassifyTier:
    @pytest.mark.parametrize("sim,expected", [
        (0.90, Tier.IDENTICAL), (1.0, Tier.IDENTICAL), (0.85, Tier.IDENTICAL),
        (0.70, Tier.HIGH), (0.60, Tier.HIGH), (0.849999, Tier.HIGH),
        (0.45, Tier.MODERATE), (0.35, Tier.MODERATE), (0.599999, Tier.MODERATE),
        (0.30, Tier.NONE), (0.0, Tier.NONE), (0.349999, Tier.NONE),
    ])
    def test_boundaries(self, sim, expected):
        assert classify_tier(sim) == expected

    def test_monotone_in_similarity(self):
        sims = [i / 1000 for i in range(1001)]
        tiers = [classify_tier(s) for s in sims]
        assert tiers == sorted(tiers)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            classify_tier(1.5)

    def test_bad_bounds_rejected(self):
        with pytest.raises(ValueError):
            TierBounds(identical_min=0.5, high_min=0.6, moderate_min=0.35)


class TestFindPairsAndReport:
    def _planted(self):
        # ten pairs of identical checks, each pair lexically unlike the rest
        words = ["belt", "motor", "valve", "gauge", "anchor", "damper", "relay",
                 "hose", "beam", "coil"]
        records = []
        for i, word in enumerate(words):
            text = f"inspect {word} unit{i} fastening"
            records.append(_record(f"p{i}a", text=text))
            records.append(_record(f"p{i}b", text=text))
        for i in range(80):
            records.append(_record(f"n{i}", site=f"FC-{i}", text=f"solo item{i} check"))
        return records, words

    def test_planted_exact_duplicates_counted_once_each(self):
        records, words = self._planted()
        report = dedup_report(records)
        assert report.total_checks == 100
        assert report.counts["Identical"] == 20
        assert report.percentage("Identical") == pytest.approx(20.0)

    def test_tier_counts_sum_to_total_row(self):
        records, _ = synthesize_corpus(CorpusSpec(
            n_checks=400, fail_fraction=0.1, n_duplicate_pairs=10,
            n_paraphrase_pairs=10, seed=3))
        report = dedup_report(records)
        data = report.to_dict()["categories"]
        assert data["Total"]["number"] == sum(
            data[t]["number"] for t in ("Identical", "High", "Moderate"))

    def test_no_similarity_gives_empty_report(self):
        records = [_record(f"n{i}", site=f"FC-{i}", text=f"solo item{i}") for i in range(10)]
        report = dedup_report(records)
        assert report.identified_total == 0

    def test_pairs_sorted_and_tiered(self):
        records, _ = synthesize_corpus(CorpusSpec(
            n_checks=300, fail_fraction=0.1, n_duplicate_pairs=8,
            n_paraphrase_pairs=8, seed=4))
        pairs = find_pairs(records)
        sims = [p.similarity for p in pairs]
        assert sims == sorted(sims, reverse=True)
        for p in pairs:
            assert p.tier == classify_tier(p.similarity)
            assert p.id_a < p.id_b
            assert p.decision == "pending"

    def test_planted_duplicates_found(self):
        records, truth = synthesize_corpus(CorpusSpec(
            n_checks=300, fail_fraction=0.1, n_duplicate_pairs=8,
            n_paraphrase_pairs=8, seed=5))
        pairs = {p.key: p for p in find_pairs(records)}
        for key in truth.duplicate_pairs:
            assert tuple(key) in pairs
            assert pairs[tuple(key)].tier == Tier.IDENTICAL

    def test_report_table_format(self):
        records, _ = self._planted()
        table = dedup_report(records).table()
        assert "Identical" in table and "Total" in table and "%" in table

    def test_jsonl_roundtrip(self, tmp_path):
        records, _ = synthesize_corpus(CorpusSpec(
            n_checks=200, fail_fraction=0.1, n_duplicate_pairs=5, seed=6))
        pairs = find_pairs(records)
        path = tmp_path / "pairs.jsonl"
        save_pairs(pairs, path)
        assert load_pairs(path) == pairs


def test_pair_orders_ids():
    pair = DuplicatePair(id_a="z", id_b="a", similarity=0.9, tier=Tier.IDENTICAL)
    assert (pair.id_a, pair.id_b) == ("a", "z")


def test_pair_with_equal_ids_rejected():
    with pytest.raises(ValueError):
        DuplicatePair(id_a="a", id_b="a", similarity=1.0, tier=Tier.IDENTICAL)
