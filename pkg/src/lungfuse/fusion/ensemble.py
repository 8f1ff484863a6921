"""
SVM+CNN baseline: average the class probabilities of two independently trained models.
"""

import numpy as np

from lungfuse.errors import ModelError

_SUM_TOLERANCE = 1e-6


def _check_probabilities(p: np.ndarray, name: str) -> None:
    if not np.all(np.isfinite(p)) or np.any(p < 0) or np.any(np.abs(p.sum(axis=-1) - 1.0) > _SUM_TOLERANCE):
        raise ModelError(f"{name} is not a probability vector", code="invalid_probabilities")


def combine_probabilities(p_svm: np.ndarray, p_cnn: np.ndarray) -> np.ndarray:
    """Unweighted mean of two class-probability vectors (or row batches), renormalized."""
    p_svm = np.asarray(p_svm, dtype=np.float64)
    p_cnn = np.asarray(p_cnn, dtype=np.float64)
    if p_svm.shape != p_cnn.shape:
        raise ModelError(
            "probability inputs differ in shape",
            code="shape_mismatch",
            details={"svm": list(p_svm.shape), "cnn": list(p_cnn.shape)},
        )
    _check_probabilities(p_svm, "svm probabilities")
    _check_probabilities(p_cnn, "cnn probabilities")
    mean = 0.5 * (p_svm + p_cnn)
    return mean / mean.sum(axis=-1, keepdims=True)
