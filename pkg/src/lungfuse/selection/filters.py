"""
Fitted column filters that run ahead of the Lasso: variance, standardization, K-best.

Each stage is fitted on training rows only and applied to raw arrays by
`transform`; kept index lists are strictly increasing.
"""

import logging
import warnings

import numpy as np
from sklearn.feature_selection import f_classif

from lungfuse.errors import SelectionError
from lungfuse.models.selection import KBestDoc, StandardizerDoc, VarianceFilterDoc
from lungfuse.selection.matrix import FeatureMatrix

logger = logging.getLogger(__name__)


def _require_rows(values: np.ndarray, minimum: int, stage: str) -> None:
    if values.shape[0] < minimum or values.shape[1] == 0:
        raise SelectionError(
            f"{stage} needs at least {minimum} samples and one feature",
            code="empty_matrix",
            details={"shape": list(values.shape)},
        )


def _require_width(values: np.ndarray, width: int, stage: str) -> None:
    if values.ndim != 2 or values.shape[1] != width:
        raise SelectionError(
            f"{stage} expects {width} columns",
            code="width_mismatch",
            details={"shape": list(values.shape)},
        )


# ── Variance ──


class VarianceFilter:
    __slots__ = ("threshold", "variances", "kept")

    def __init__(self, threshold: float, variances: np.ndarray, kept: np.ndarray):
        self.threshold = threshold
        self.variances = variances
        self.kept = kept

    def transform(self, values: np.ndarray) -> np.ndarray:
        _require_width(values, self.variances.size, "variance filter")
        return values[:, self.kept]

    def to_doc(self) -> VarianceFilterDoc:
        return VarianceFilterDoc(threshold=self.threshold, variances=self.variances.tolist(), kept=self.kept.tolist())

    @classmethod
    def from_doc(cls, doc: VarianceFilterDoc) -> "VarianceFilter":
        return cls(doc.threshold, np.array(doc.variances, dtype=np.float64), np.array(doc.kept, dtype=np.int64))


def variance_filter_fit(x: FeatureMatrix, threshold: float = 0.8) -> VarianceFilter:
    """Keep columns whose population variance over the training rows is >= threshold."""
    _require_rows(x.values, 2, "variance filter")
    variances = np.var(x.values, axis=0)
    kept = np.flatnonzero(variances >= threshold)
    logger.debug("variance filter kept %d of %d features", kept.size, variances.size)
    return VarianceFilter(float(threshold), variances, kept)


# ── Standardization ──


class Standardizer:
    __slots__ = ("mean", "std")

    def __init__(self, mean: np.ndarray, std: np.ndarray):
        self.mean = mean
        self.std = std

    def transform(self, values: np.ndarray) -> np.ndarray:
        _require_width(values, self.mean.size, "standardizer")
        centered = values - self.mean
        safe = np.where(self.std > 0, self.std, 1.0)
        # zero-variance columns map to 0
        return np.where(self.std > 0, centered / safe, 0.0)

    def to_doc(self) -> StandardizerDoc:
        return StandardizerDoc(mean=self.mean.tolist(), std=self.std.tolist())

    @classmethod
    def from_doc(cls, doc: StandardizerDoc) -> "Standardizer":
        return cls(np.array(doc.mean, dtype=np.float64), np.array(doc.std, dtype=np.float64))


def standardize_fit(values: np.ndarray) -> Standardizer:
    _require_rows(values, 1, "standardizer")
    return Standardizer(values.mean(axis=0), values.std(axis=0))


def standardize_apply(standardizer: Standardizer, x: FeatureMatrix) -> FeatureMatrix:
    return x.with_values(standardizer.transform(x.values), x.names)


# ── K-best ──


class KBest:
    __slots__ = ("k", "scores", "kept")

    def __init__(self, k: int, scores: np.ndarray, kept: np.ndarray):
        self.k = k
        self.scores = scores
        self.kept = kept

    def ranking(self) -> np.ndarray:
        """All column indices, best score first, ties by lower index."""
        return np.lexsort((np.arange(self.scores.size), -self.scores))

    def transform(self, values: np.ndarray) -> np.ndarray:
        _require_width(values, self.scores.size, "k-best")
        return values[:, self.kept]

    def to_doc(self) -> KBestDoc:
        return KBestDoc(k=self.k, scores=self.scores.tolist(), kept=self.kept.tolist())

    @classmethod
    def from_doc(cls, doc: KBestDoc) -> "KBest":
        return cls(doc.k, np.array(doc.scores, dtype=np.float64), np.array(doc.kept, dtype=np.int64))


def anova_f_scores(values: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """One-way ANOVA F per column; constant columns score 0, perfect separation +inf."""
    with warnings.catch_warnings(), np.errstate(divide="ignore", invalid="ignore"):
        warnings.simplefilter("ignore", category=RuntimeWarning)
        # sklearn flags constant columns with a UserWarning; they score 0 here
        warnings.simplefilter("ignore", category=UserWarning)
        scores, _ = f_classif(values, labels)
    return np.nan_to_num(np.asarray(scores, dtype=np.float64), nan=0.0, posinf=np.inf)


def kbest_fit(values: np.ndarray, labels: np.ndarray, k: int) -> KBest:
    if k < 1:
        raise SelectionError("k must be >= 1", details={"k": k})
    _require_rows(values, 2, "k-best")
    labels = np.asarray(labels)
    if np.unique(labels).size < 2:
        raise SelectionError("k-best needs at least two classes", code="single_class")
    width = values.shape[1]
    if k > width:
        logger.warning("k=%d exceeds %d remaining features; keeping all", k, width)
        k = width
    kbest = KBest(k, anova_f_scores(values, labels), np.empty(0, dtype=np.int64))
    kbest.kept = np.sort(kbest.ranking()[:k])
    return kbest
