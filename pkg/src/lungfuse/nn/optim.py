"""
SGD with momentum and the early-stopping tracker.
"""

from collections.abc import Mapping
from typing import Optional

import numpy as np

from lungfuse.config import SGDConfig
from lungfuse.errors import ModelError

Params = dict[str, np.ndarray]


def zeros_like_params(params: Mapping[str, np.ndarray]) -> Params:
    return {name: np.zeros_like(p) for name, p in params.items()}


def sgd_step(
    params: Mapping[str, np.ndarray],
    grads: Mapping[str, np.ndarray],
    velocity: Mapping[str, np.ndarray],
    cfg: SGDConfig,
) -> tuple[Params, Params]:
    """v ← μv − η·g; p ← p + v. Returns fresh (params, velocity); inputs are untouched."""
    if params.keys() != grads.keys() or params.keys() != velocity.keys():
        raise ModelError("params, grads and velocity must share names", code="shape_mismatch")
    new_params: Params = {}
    new_velocity: Params = {}
    for name, p in params.items():
        g, v = grads[name], velocity[name]
        if g.shape != p.shape or v.shape != p.shape:
            raise ModelError(
                f"gradient shape mismatch for {name}",
                code="shape_mismatch",
                details={"param": list(p.shape), "grad": list(g.shape), "velocity": list(v.shape)},
            )
        v_next = cfg.momentum * v - cfg.learning_rate * g
        new_velocity[name] = v_next
        new_params[name] = p + v_next
    return new_params, new_velocity


class EarlyStopping:
    """Tracks validation loss; stops once more than `patience` epochs pass without improvement."""

    def __init__(self, patience: int, min_delta: float = 0.0):
        if patience < 1:
            raise ModelError("patience must be >= 1", details={"patience": patience})
        self.patience = patience
        self.min_delta = min_delta
        self.best: Optional[float] = None
        self.best_epoch = -1
        self.num_bad = 0

    def update(self, epoch: int, value: float) -> bool:
        """Record one epoch; True when it is the new best."""
        if self.best is None or value < self.best - self.min_delta:
            self.best = value
            self.best_epoch = epoch
            self.num_bad = 0
            return True
        self.num_bad += 1
        return False

    @property
    def should_stop(self) -> bool:
        return self.num_bad > self.patience
