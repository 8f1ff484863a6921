"""
Minibatch SGD loop shared by the fusion model and the CNN baseline.
"""

import logging
from typing import Optional

import numpy as np

from lungfuse.config import ModelConfig, SGDConfig
from lungfuse.errors import ModelError
from lungfuse.fusion.models import Batch, Classifier, CNNModel, FusionModel
from lungfuse.models.checkpoint import EpochRecord, TrainingLog
from lungfuse.nn.layers import softmax_ce
from lungfuse.nn.optim import EarlyStopping, sgd_step, zeros_like_params

logger = logging.getLogger(__name__)

EVAL_BATCH = 32


def evaluate_batch(model: Classifier, batch: Batch) -> tuple[float, float]:
    """Mean cross-entropy and accuracy over `batch`."""
    total_loss, correct = 0.0, 0
    for start in range(0, len(batch), EVAL_BATCH):
        part = batch.take(np.arange(start, min(start + EVAL_BATCH, len(batch))))
        logits, _ = model.forward(part)
        loss, _, _ = softmax_ce(logits, part.labels)
        total_loss += loss * len(part)
        correct += int(np.sum(np.argmax(logits, axis=1) == part.labels))
    return total_loss / len(batch), correct / len(batch)


class Trainer:
    def __init__(self, cfg: SGDConfig):
        self.cfg = cfg

    def fit(self, model: Classifier, train: Batch, val: Batch, max_epochs: Optional[int] = None) -> TrainingLog:
        """Train in place; the model ends on its best-validation-loss snapshot."""
        if len(train) == 0 or len(val) == 0:
            raise ModelError("training and validation splits must be non-empty", code="empty_split")
        cfg = self.cfg
        rng = np.random.default_rng([cfg.seed, 1])
        velocity = zeros_like_params(model.params)
        stopper = EarlyStopping(cfg.patience)
        best_params = {k: v.copy() for k, v in model.params.items()}
        log = TrainingLog()
        for epoch in range(1, (max_epochs or cfg.max_epochs) + 1):
            order = rng.permutation(len(train))
            for start in range(0, len(train), cfg.batch_size):
                part = train.take(order[start : start + cfg.batch_size])
                logits, cache = model.forward(part)
                _, _, dlogits = softmax_ce(logits, part.labels)
                grads = model.backward(cache, dlogits)
                model.params, velocity = sgd_step(model.params, grads, velocity, cfg)
            train_loss, train_acc = evaluate_batch(model, train)
            val_loss, val_acc = evaluate_batch(model, val)
            log.epochs.append(EpochRecord(
                epoch=epoch, train_loss=train_loss, train_accuracy=train_acc,
                val_loss=val_loss, val_accuracy=val_acc,
            ))
            logger.info(
                "epoch %d: train loss %.4f acc %.3f | val loss %.4f acc %.3f",
                epoch, train_loss, train_acc, val_loss, val_acc,
            )
            if stopper.update(epoch, val_loss):
                best_params = {k: v.copy() for k, v in model.params.items()}
            if stopper.should_stop:
                log.stopped_early = True
                logger.info("early stop after epoch %d (best %d)", epoch, stopper.best_epoch)
                break
        model.params = best_params
        log.best_epoch = stopper.best_epoch
        return log


def train_fusion(
    train: Batch, val: Batch, model_cfg: ModelConfig, cfg: SGDConfig, max_epochs: Optional[int] = None,
) -> tuple[FusionModel, TrainingLog]:
    """Fresh fusion model sized to the RF width of `train`, trained end to end."""
    if train.rf is None or train.rf.ndim != 2:
        raise ModelError("fusion training needs the selected radiomics rows", code="rf_width_mismatch")
    model = FusionModel.init(model_cfg, train.rf.shape[1], cfg.seed)
    return model, Trainer(cfg).fit(model, train, val, max_epochs)


def train_cnn_baseline(
    train: Batch, val: Batch, model_cfg: ModelConfig, cfg: SGDConfig, max_epochs: Optional[int] = None,
) -> tuple[CNNModel, TrainingLog]:
    model = CNNModel.init(model_cfg, cfg.seed)
    return model, Trainer(cfg).fit(model, train, val, max_epochs)


def validation_split(n: int, fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Seeded (train, val) index split with at least one row on each side."""
    if n < 2:
        raise ModelError("need at least two samples to hold out validation rows", code="empty_split")
    order = np.random.default_rng([seed, 2]).permutation(n)
    n_val = min(max(int(round(fraction * n)), 1), n - 1)
    return np.sort(order[n_val:]), np.sort(order[:n_val])
