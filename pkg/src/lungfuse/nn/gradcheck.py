"""
Central finite-difference gradient checks.
"""

import logging
from collections.abc import Callable, Mapping
from typing import Optional

import numpy as np

logger = logging.getLogger(__name__)

DEFAULT_STEP = 1e-4


def relative_error(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(abs(analytic) + abs(numeric), 1e-6)


def numeric_partial(loss: Callable[[], float], array: np.ndarray, index: tuple[int, ...], h: float = DEFAULT_STEP) -> float:
    """(f(θ+h) − f(θ−h)) / 2h for one coordinate; the array is restored afterwards."""
    original = array[index]
    array[index] = original + h
    plus = loss()
    array[index] = original - h
    minus = loss()
    array[index] = original
    return (plus - minus) / (2 * h)


def numeric_gradient(loss: Callable[[], float], array: np.ndarray, h: float = DEFAULT_STEP) -> np.ndarray:
    grad = np.zeros_like(array)
    for index in np.ndindex(array.shape):
        grad[index] = numeric_partial(loss, array, index, h)
    return grad


class GradCheckReport:
    __slots__ = ("errors",)

    def __init__(self, errors: dict[str, float]):
        self.errors = errors

    @property
    def max_rel_error(self) -> float:
        return max(self.errors.values(), default=0.0)

    def passed(self, tolerance: float) -> bool:
        return self.max_rel_error < tolerance


def check_gradients(
    loss: Callable[[], float],
    params: Mapping[str, np.ndarray],
    grads: Mapping[str, np.ndarray],
    coords_per_tensor: Optional[int] = 10,
    seed: int = 0,
    h: float = DEFAULT_STEP,
) -> GradCheckReport:
    """Compare analytic `grads` with finite differences of `loss`.

    `loss` must read the arrays in `params`, which are perturbed in place and
    restored. `coords_per_tensor=None` checks every coordinate.
    """
    rng = np.random.default_rng(seed)
    errors: dict[str, float] = {}
    for name, array in params.items():
        if coords_per_tensor is None or coords_per_tensor >= array.size:
            flat = np.arange(array.size)
        else:
            flat = rng.choice(array.size, size=coords_per_tensor, replace=False)
        worst = 0.0
        for f in flat:
            index = np.unravel_index(int(f), array.shape)
            numeric = numeric_partial(loss, array, index, h)
            worst = max(worst, relative_error(float(grads[name][index]), numeric))
        errors[name] = worst
        logger.debug("gradcheck %s: max rel error %.3g", name, worst)
    return GradCheckReport(errors)
