"""Tests for splitting, confusion matrices and accuracy summaries."""

import numpy as np
import pytest

from lungfuse.errors import EvaluationError
from lungfuse.evaluation import (
    confusion,
    make_split,
    random_split,
    recall_not_worse,
    stratified_split,
    summarize,
    summarize_runs,
)
from lungfuse.models.evaluation import MethodSummary


class Cohort:
    def __init__(self, counts):
        self.labels = np.repeat(np.arange(len(counts)), counts)
        self.ids = [f"nodule-{i:04d}" for i in range(self.labels.size)]


# ── splits ───────────────────────────────────────────────────────────────


class TestStratifiedSplit:
    def test_class_counts_follow_floor(self):
        cohort = Cohort([158, 136, 53, 329])
        doc = stratified_split(cohort, 0.8, seed=0)
        label_of = dict(zip(cohort.ids, cohort.labels))
        train_counts = np.bincount([label_of[i] for i in doc.train_ids], minlength=4)
        test_counts = np.bincount([label_of[i] for i in doc.test_ids], minlength=4)
        np.testing.assert_array_equal(train_counts, [126, 108, 42, 263])
        np.testing.assert_array_equal(test_counts, [32, 28, 11, 66])

    def test_partition_and_sorted(self):
        cohort = Cohort([10, 10, 10, 10])
        doc = stratified_split(cohort, 0.7, seed=3)
        assert set(doc.train_ids).isdisjoint(doc.test_ids)
        assert sorted(doc.train_ids + doc.test_ids) == cohort.ids
        assert doc.train_ids == sorted(doc.train_ids)
        assert doc.stratified and doc.seed == 3 and doc.train_fraction == 0.7

    def test_seeded(self):
        cohort = Cohort([20, 20, 20, 20])
        assert stratified_split(cohort, 0.8, 1) == stratified_split(cohort, 0.8, 1)
        assert stratified_split(cohort, 0.8, 1).test_ids != stratified_split(cohort, 0.8, 2).test_ids

    def test_full_fraction_leaves_no_test_set(self):
        with pytest.raises(EvaluationError) as exc:
            stratified_split(Cohort([5, 5, 5, 5]), 1.0, 0)
        assert exc.value.code == "empty_test_set"

    def test_tiny_fraction_leaves_no_train_set(self):
        with pytest.raises(EvaluationError) as exc:
            stratified_split(Cohort([2, 2, 2, 2]), 0.1, 0)
        assert exc.value.code == "empty_train_set"

    def test_missing_class_is_skipped(self):
        doc = stratified_split(Cohort([10, 0, 10, 10]), 0.5, 0)
        assert len(doc.train_ids) == 15 and len(doc.test_ids) == 15


def test_random_split_sizes():
    doc = random_split(Cohort([7, 7, 7, 7]), 0.75, seed=0)
    assert len(doc.train_ids) == 21 and len(doc.test_ids) == 7
    assert not doc.stratified


def test_make_split_dispatch():
    cohort = Cohort([8, 8, 8, 8])
    assert make_split(cohort, 0.5, 0, stratified=True).stratified
    assert not make_split(cohort, 0.5, 0, stratified=False).stratified


# ── confusion and metrics ────────────────────────────────────────────────


class TestConfusion:
    def test_perfect(self):
        cm = confusion([0, 1, 2, 3], [0, 1, 2, 3])
        np.testing.assert_array_equal(cm, np.eye(4, dtype=np.int64))
        assert summarize(cm).accuracy == 1.0

    def test_rows_are_truth(self):
        cm = confusion([1, 1, 1, 1], [0, 1, 2, 3])
        np.testing.assert_array_equal(cm[:, 1], [1, 1, 1, 1])
        report = summarize(cm, method="svm", seed=2)
        assert report.accuracy == 0.25
        assert report.recall == [0.0, 1.0, 0.0, 0.0]
        assert report.precision[1] == 0.25
        assert report.undefined_precision == [True, False, True, True]
        assert report.method == "svm" and report.seed == 2

    def test_missing_class_recall_flagged(self):
        report = summarize(confusion([0, 0, 2], [0, 1, 2]))
        assert report.undefined_recall == [False, False, False, True]
        assert report.recall[3] == 0.0
        assert report.accuracy == pytest.approx(2 / 3)

    def test_length_mismatch(self):
        with pytest.raises(EvaluationError) as exc:
            confusion([0, 1], [0])
        assert exc.value.code == "length_mismatch"

    def test_empty(self):
        with pytest.raises(EvaluationError) as exc:
            confusion([], [])
        assert exc.value.code == "empty_evaluation"
        with pytest.raises(EvaluationError):
            summarize(np.zeros((4, 4), dtype=np.int64))

    @pytest.mark.parametrize("preds,labels", [([4], [0]), ([0], [-1])])
    def test_label_out_of_range(self, preds, labels):
        with pytest.raises(EvaluationError) as exc:
            confusion(preds, labels)
        assert exc.value.code == "label_out_of_range"


class TestSummaries:
    def test_mean_and_sample_sd(self):
        runs = [summarize(confusion(p, [0, 1, 2, 3]), "cnn", s) for s, p in enumerate(([0, 1, 2, 3], [0, 1, 2, 0], [0, 0, 0, 0]))]
        summary = summarize_runs("cnn", runs)
        assert summary.accuracy_mean == pytest.approx((1.0 + 0.75 + 0.25) / 3)
        assert summary.accuracy_sd == pytest.approx(np.std([1.0, 0.75, 0.25], ddof=1))
        assert summary.recall_mean == pytest.approx([1.0, 2 / 3, 2 / 3, 1 / 3])

    def test_single_run_has_zero_sd(self):
        run = summarize(confusion([0, 1], [0, 1]), "svm")
        assert summarize_runs("svm", [run]).accuracy_sd == 0.0

    def test_recall_not_worse(self):
        fusion = MethodSummary(method="fusion", accuracy_mean=0.8, accuracy_sd=0.0, recall_mean=[0.9, 0.5, 0.7, 0.8])
        svm = MethodSummary(method="svm", accuracy_mean=0.7, accuracy_sd=0.0, recall_mean=[0.8, 0.6, 0.7, 0.9])
        assert recall_not_worse(fusion, [svm]) == [True, False, True, False]
        assert recall_not_worse(fusion, [svm], slack=0.1) == [True, True, True, True]
