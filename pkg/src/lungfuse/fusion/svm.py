"""
One-vs-rest linear SVM over the selected radiomics vector.

Each class machine minimizes (1/2)‖w‖² + C·Σ hinge(1 − y·(w·x + b)) by
full-batch subgradient descent with step lr / ((1 + C·n)·√(t+1)); the
lowest-objective iterate is kept. Class probabilities are a softmax over the
decision values.
"""

import logging

import numpy as np

from lungfuse.errors import ModelError
from lungfuse.models.labels import NUM_CLASSES
from lungfuse.nn.layers import softmax

logger = logging.getLogger(__name__)


class LinearSVM:
    kind = "svm"

    __slots__ = ("weights", "bias", "c")

    def __init__(self, weights: np.ndarray, bias: np.ndarray, c: float = 1.0):
        self.weights = np.asarray(weights, dtype=np.float64)
        self.bias = np.asarray(bias, dtype=np.float64)
        self.c = c

    @property
    def rf_width(self) -> int:
        return self.weights.shape[1]

    @property
    def params(self) -> dict[str, np.ndarray]:
        return {"weights": self.weights, "bias": self.bias}

    def decision(self, values: np.ndarray) -> np.ndarray:
        values = np.atleast_2d(np.asarray(values, dtype=np.float64))
        if values.shape[1] != self.rf_width:
            raise ModelError(
                f"svm expects {self.rf_width} features",
                code="rf_width_mismatch",
                details={"input": list(values.shape)},
            )
        return values @ self.weights.T + self.bias

    def predict(self, values: np.ndarray) -> np.ndarray:
        # argmax ties resolve to the lowest class index
        return np.argmax(self.decision(values), axis=1)

    def predict_proba(self, values: np.ndarray) -> np.ndarray:
        return softmax(self.decision(values))


def _objective(w: np.ndarray, b: float, x: np.ndarray, y: np.ndarray, c: float) -> float:
    margins = y * (x @ w + b)
    return float(0.5 * np.dot(w, w) + c * np.maximum(0.0, 1.0 - margins).sum())


def _fit_binary(x: np.ndarray, y: np.ndarray, c: float, epochs: int, lr: float) -> tuple[np.ndarray, float]:
    n, p = x.shape
    w, b = np.zeros(p), 0.0
    best_w, best_b, best = w.copy(), b, _objective(w, b, x, y, c)
    scale = lr / (1.0 + c * n)
    for t in range(epochs):
        active = y * (x @ w + b) < 1.0
        gw = w - c * (y[active, None] * x[active]).sum(axis=0)
        gb = -c * y[active].sum()
        step = scale / np.sqrt(t + 1.0)
        w = w - step * gw
        b = b - step * gb
        obj = _objective(w, b, x, y, c)
        if obj < best:
            best_w, best_b, best = w.copy(), b, obj
    return best_w, float(best_b)


def train_svm(
    values: np.ndarray,
    labels: np.ndarray,
    c: float = 1.0,
    epochs: int = 500,
    learning_rate: float = 0.5,
    num_classes: int = NUM_CLASSES,
) -> LinearSVM:
    values = np.asarray(values, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if values.ndim != 2 or values.shape[0] != labels.size or labels.size == 0:
        raise ModelError("svm needs one label per feature row", code="shape_mismatch")
    if np.unique(labels).size < 2:
        raise ModelError("svm training data has a single class", code="single_class")
    weights = np.zeros((num_classes, values.shape[1]))
    bias = np.zeros(num_classes)
    for k in range(num_classes):
        y = np.where(labels == k, 1.0, -1.0)
        weights[k], bias[k] = _fit_binary(values, y, c, epochs, learning_rate)
    svm = LinearSVM(weights, bias, c)
    logger.info("svm train accuracy %.3f", float(np.mean(svm.predict(values) == labels)))
    return svm
