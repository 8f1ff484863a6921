"""
Train/test splitting, confusion matrices and accuracy summaries.

Confusion rows are ground truth (AAH..IA), columns are predictions.
"""

import logging
from collections.abc import Sequence
from typing import Protocol

import numpy as np
from sklearn.metrics import confusion_matrix

from lungfuse.errors import EvaluationError
from lungfuse.models.evaluation import MethodSummary, MetricsReport, SplitDoc
from lungfuse.models.labels import NUM_CLASSES

logger = logging.getLogger(__name__)


class Labeled(Protocol):
    """Anything with sample ids and aligned labels (a Dataset or a FeatureMatrix)."""

    @property
    def ids(self) -> list[str]: ...

    @property
    def labels(self) -> np.ndarray: ...

def _check_split(train: list[str], test: list[str], n_total: int) -> None:
    if n_total == 0:
        raise EvaluationError("cannot split an empty dataset", code="empty_dataset")
    if not test:
        raise EvaluationError("split leaves the test set empty", code="empty_test_set")
    if not train:
        raise EvaluationError("split leaves the training set empty", code="empty_train_set")


def stratified_split(dataset: Labeled, fraction: float = 0.8, seed: int = 0) -> SplitDoc:
    """Per class: shuffle by seed, floor(fraction·count) rows to train, the rest to test."""
    rng = np.random.default_rng(seed)
    ids = np.array(dataset.ids)
    labels = dataset.labels
    train: list[str] = []
    test: list[str] = []
    for label in range(NUM_CLASSES):
        members = ids[labels == label]
        if members.size == 0:
            continue
        shuffled = members[rng.permutation(members.size)]
        n_train = int(np.floor(fraction * members.size))
        train.extend(shuffled[:n_train].tolist())
        test.extend(shuffled[n_train:].tolist())
    _check_split(train, test, len(ids))
    return SplitDoc(seed=seed, stratified=True, train_fraction=fraction, train_ids=sorted(train), test_ids=sorted(test))


def random_split(dataset: Labeled, fraction: float = 0.8, seed: int = 0) -> SplitDoc:
    ids = np.array(dataset.ids)
    shuffled = ids[np.random.default_rng(seed).permutation(ids.size)]
    n_train = int(np.floor(fraction * ids.size))
    train, test = shuffled[:n_train].tolist(), shuffled[n_train:].tolist()
    _check_split(train, test, ids.size)
    return SplitDoc(seed=seed, stratified=False, train_fraction=fraction, train_ids=sorted(train), test_ids=sorted(test))


def make_split(dataset: Labeled, fraction: float, seed: int, stratified: bool = True) -> SplitDoc:
    doc = (stratified_split if stratified else random_split)(dataset, fraction, seed)
    logger.debug("split seed %d: %d train / %d test", seed, len(doc.train_ids), len(doc.test_ids))
    return doc


def confusion(preds: Sequence[int], labels: Sequence[int]) -> np.ndarray:
    preds = np.asarray(preds, dtype=np.int64).reshape(-1)
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    if preds.size != labels.size:
        raise EvaluationError(
            "predictions and labels differ in length",
            code="length_mismatch",
            details={"preds": int(preds.size), "labels": int(labels.size)},
        )
    if preds.size == 0:
        raise EvaluationError("nothing to evaluate", code="empty_evaluation")
    for name, values in (("preds", preds), ("labels", labels)):
        if values.min() < 0 or values.max() >= NUM_CLASSES:
            raise EvaluationError(f"{name} outside 0..{NUM_CLASSES - 1}", code="label_out_of_range")
    return confusion_matrix(labels, preds, labels=list(range(NUM_CLASSES))).astype(np.int64)


def summarize(cm: np.ndarray, method: str = "", seed: int = 0) -> MetricsReport:
    """Accuracy = trace/total; recall and precision default to 0 where undefined, with flags."""
    cm = np.asarray(cm, dtype=np.int64)
    total = int(cm.sum())
    if total == 0:
        raise EvaluationError("confusion matrix is empty", code="empty_evaluation")
    truth = cm.sum(axis=1)
    predicted = cm.sum(axis=0)
    diag = np.diag(cm).astype(np.float64)
    recall = np.divide(diag, truth, out=np.zeros_like(diag), where=truth > 0)
    precision = np.divide(diag, predicted, out=np.zeros_like(diag), where=predicted > 0)
    return MetricsReport(
        method=method,
        seed=seed,
        accuracy=float(np.trace(cm)) / total,
        confusion=cm.tolist(),
        recall=recall.tolist(),
        precision=precision.tolist(),
        undefined_precision=(predicted == 0).tolist(),
        undefined_recall=(truth == 0).tolist(),
    )


def summarize_runs(method: str, runs: Sequence[MetricsReport]) -> MethodSummary:
    """Mean and sample sd of accuracy, mean per-class recall over seeds."""
    acc = np.array([r.accuracy for r in runs])
    recall = np.array([r.recall for r in runs])
    return MethodSummary(
        method=method,
        accuracy_mean=float(acc.mean()),
        accuracy_sd=float(acc.std(ddof=1)) if acc.size > 1 else 0.0,
        recall_mean=recall.mean(axis=0).tolist(),
    )


def recall_not_worse(candidate: MethodSummary, others: Sequence[MethodSummary], slack: float = 0.0) -> list[bool]:
    """Per class: is the candidate's mean recall ≥ every other method's, minus slack."""
    cand = np.array(candidate.recall_mean)
    best_other = np.max([o.recall_mean for o in others], axis=0) if others else np.zeros_like(cand)
    return (cand >= best_other - slack).tolist()
