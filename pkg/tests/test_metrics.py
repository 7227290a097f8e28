import numpy as np
import pytest

from audit_triage.errors import MetricUndefinedError
from audit_triage.metrics import (ConfusionMatrix, accuracy, confusion,
                                  evaluate_scores, f1, f1_fail, report_table,
                                  roc_auc, sensitivity, specificity)


def brute_force_confusion(scores, labels, threshold):
    tp = fp = tn = fn = 0
    for s, y in zip(scores, labels):
        predicted_pass = s >= threshold
        if predicted_pass and y == "pass":
            tp += 1
        elif predicted_pass and y == "fail":
            fp += 1
        elif not predicted_pass and y == "fail":
            tn += 1
        else:
            fn += 1
    return tp, fp, tn, fn


def brute_force_auc(scores, labels):
    pos = [s for s, y in zip(scores, labels) if y == "pass"]
    neg = [s for s, y in zip(scores, labels) if y == "fail"]
    wins = ties = 0
    for p in pos:
        for n in neg:
            if p > n:
                wins += 1
            elif p == n:
                ties += 1
    return (wins + 0.5 * ties) / (len(pos) * len(neg))


class TestConfusion:
    def test_basic_tally(self):
        cm = confusion([0.9, 0.1], ["pass", "fail"], 0.5)
        assert (cm.tp, cm.tn, cm.fp, cm.fn) == (1, 1, 0, 0)

    def test_threshold_zero_predicts_everything_pass(self):
        cm = confusion([0.2, 0.7, 0.01], ["fail", "pass", "fail"], 0.0)
        assert cm.fp == 2 and cm.fn == 0

    def test_threshold_above_max_predicts_everything_fail(self):
        cm = confusion([0.2, 0.7], ["fail", "pass"], 0.71)
        assert cm.tp == 0 and cm.fn == 1 and cm.tn == 1

    def test_length_mismatch_and_empty(self):
        with pytest.raises(ValueError):
            confusion([0.1], ["pass", "fail"], 0.5)
        with pytest.raises(ValueError):
            confusion([], [], 0.5)


class TestScalarMetrics:
    def test_f1_hand_value(self):
        assert f1(ConfusionMatrix(tp=3, fp=1, tn=0, fn=1)) == 0.75

    def test_sensitivity_hand_value(self):
        assert sensitivity(ConfusionMatrix(tp=50, fp=0, tn=0, fn=50)) == 0.5

    def test_perfect_accuracy(self):
        assert accuracy(ConfusionMatrix(tp=7, fp=0, tn=5, fn=0)) == 1.0

    def test_zero_denominators_raise(self):
        empty = ConfusionMatrix(tp=0, fp=0, tn=0, fn=0)
        for metric in (accuracy, sensitivity, specificity, f1):
            with pytest.raises(MetricUndefinedError):
                metric(empty)

    def test_f1_fail_swaps_roles(self):
        cm = ConfusionMatrix(tp=3, fp=1, tn=4, fn=2)
        assert f1_fail(cm) == f1(cm.swapped())
        assert f1_fail(cm) == 4 / (4 + 0.5 * (2 + 1))

    def test_negative_counts_rejected(self):
        with pytest.raises(ValueError):
            ConfusionMatrix(tp=-1, fp=0, tn=0, fn=0)


class TestRocAuc:
    def test_perfect_separation(self):
        assert roc_auc([0.9, 0.8, 0.1, 0.2], ["pass", "pass", "fail", "fail"]) == 1.0

    def test_all_tied_scores(self):
        assert roc_auc([0.5, 0.5, 0.5], ["pass", "fail", "pass"]) == 0.5

    def test_hand_example(self):
        scores = [0.1, 0.4, 0.35, 0.8]
        labels = ["fail", "fail", "pass", "pass"]
        assert brute_force_auc(scores, labels) == 0.75
        assert roc_auc(scores, labels) == pytest.approx(0.75, abs=1e-12)

    def test_single_class_rejected(self):
        with pytest.raises(MetricUndefinedError):
            roc_auc([0.1, 0.2], ["pass", "pass"])

    def test_matches_pairwise_oracle(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            n = int(rng.integers(4, 60))
            scores = np.round(rng.random(n), 2)  # rounding forces ties
            labels = ["pass" if rng.random() < 0.5 else "fail" for _ in range(n)]
            if len(set(labels)) < 2:
                labels[0] = "pass"
                labels[1] = "fail"
            assert roc_auc(scores, labels) == pytest.approx(
                brute_force_auc(scores.tolist(), labels), abs=1e-9)

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(6)
        scores = rng.random(50)
        labels = ["pass" if rng.random() < 0.4 else "fail" for _ in range(50)]
        base = roc_auc(scores, labels)
        assert roc_auc(np.exp(3 * scores), labels) == pytest.approx(base, abs=1e-12)
        assert roc_auc(scores ** 3, labels) == pytest.approx(base, abs=1e-12)

    def test_complement_identity(self):
        rng = np.random.default_rng(7)
        scores = np.round(rng.random(80), 1)
        labels = ["pass" if rng.random() < 0.5 else "fail" for _ in range(80)]
        labels[0], labels[1] = "pass", "fail"
        assert roc_auc(scores, labels) + roc_auc(1.0 - scores, labels) == pytest.approx(
            1.0, abs=1e-9)


def test_accuracy_decomposition_identity():
    rng = np.random.default_rng(8)
    for _ in range(50):
        cm = ConfusionMatrix(*(int(v) for v in rng.integers(1, 50, 4)))
        lhs = accuracy(cm)
        rhs = (sensitivity(cm) * cm.positives + specificity(cm) * cm.negatives) / (
            cm.positives + cm.negatives)
        assert lhs == pytest.approx(rhs, abs=1e-12)


def test_evaluate_scores_report_and_table():
    scores = [0.9, 0.2, 0.7, 0.3]
    labels = ["pass", "fail", "pass", "fail"]
    report = evaluate_scores(scores, labels, threshold=0.5, training_time=1.25)
    assert report.accuracy == 1.0 and report.auc == 1.0
    assert report.positive_label == "pass"
    table = report_table({"model": report})
    assert "AUC" in table and "model" in table
    assert "1.0000" in table
