"""
Gradient checks over every layer kernel and a full fusion model.
"""

import logging

import numpy as np

from lungfuse.config import ModelConfig
from lungfuse.fusion.models import Batch, FusionModel
from lungfuse.nn.gradcheck import check_gradients
from lungfuse.nn.layers import (
    Conv3DLayer,
    DenseLayer,
    conv3d_backward,
    conv3d_forward,
    dense_backward,
    dense_forward,
    global_avg_pool,
    global_avg_pool_backward,
    relu,
    relu_backward,
    softmax_ce,
)

logger = logging.getLogger(__name__)

LAYER_TOLERANCE = 1e-5
MODEL_TOLERANCE = 1e-4


def _upstream_grad(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    return rng.normal(size=shape)


def dense_check(rng: np.random.Generator, n_in: int = 8, n_out: int = 5) -> float:
    layer = DenseLayer(rng.normal(size=(n_out, n_in)), rng.normal(size=n_out))
    x = rng.normal(size=(3, n_in))
    upstream = _upstream_grad(rng, (3, n_out))

    def loss() -> float:
        return float(np.sum(dense_forward(layer, x) * upstream))

    dx, dw, db = dense_backward(layer, x, upstream)
    report = check_gradients(loss, {"x": x, "w": layer.weight, "b": layer.bias}, {"x": dx, "w": dw, "b": db}, None)
    return report.max_rel_error


def conv_check(rng: np.random.Generator, channels: int = 2, n: int = 5, stride: int = 1) -> float:
    layer = Conv3DLayer(rng.normal(size=(channels, channels, 3, 3, 3)), rng.normal(size=channels), stride)
    x = rng.normal(size=(1, channels, n, n, n))
    upstream = _upstream_grad(rng, conv3d_forward(layer, x).shape)

    def loss() -> float:
        return float(np.sum(conv3d_forward(layer, x) * upstream))

    dx, dk, db = conv3d_backward(layer, x, upstream)
    report = check_gradients(loss, {"x": x, "k": layer.kernels, "b": layer.bias}, {"x": dx, "k": dk, "b": db}, 20)
    return report.max_rel_error


def relu_check(rng: np.random.Generator) -> float:
    # keep inputs clear of the kink so central differences stay on one side
    x = rng.uniform(0.1, 1.0, size=20) * rng.choice([-1.0, 1.0], size=20)
    upstream = _upstream_grad(rng, x.shape)
    report = check_gradients(lambda: float(np.sum(relu(x) * upstream)), {"x": x}, {"x": relu_backward(x, upstream)}, None)
    return report.max_rel_error


def gap_check(rng: np.random.Generator) -> float:
    x = rng.normal(size=(2, 3, 4, 4, 4))
    upstream = _upstream_grad(rng, (2, 3))
    grad = global_avg_pool_backward(x.shape, upstream)
    report = check_gradients(lambda: float(np.sum(global_avg_pool(x) * upstream)), {"x": x}, {"x": grad}, 30)
    return report.max_rel_error


def softmax_check(rng: np.random.Generator, classes: int = 4) -> float:
    z = rng.normal(size=classes)
    label = int(rng.integers(classes))
    _, _, dz = softmax_ce(z, label)
    report = check_gradients(lambda: softmax_ce(z, label)[0], {"z": z}, {"z": dz}, None)
    return report.max_rel_error


def layer_gradchecks(seed: int = 0) -> dict[str, float]:
    rng = np.random.default_rng(seed)
    return {
        "dense": dense_check(rng),
        "conv3d": conv_check(rng),
        "conv3d_stride2": conv_check(rng, stride=2, n=6),
        "relu": relu_check(rng),
        "global_avg_pool": gap_check(rng),
        "softmax_ce": softmax_check(rng),
    }


def model_gradcheck(cfg: ModelConfig, rf_width: int = 6, seed: int = 0, coords_per_tensor: int = 10) -> dict[str, float]:
    """Max relative error per parameter tensor of a freshly initialized fusion model."""
    rng = np.random.default_rng([seed, 3])
    model = FusionModel.init(cfg, rf_width, seed)
    n = cfg.patch_size
    batch = Batch(
        rng.uniform(-1000.0, 400.0, size=(2, n, n, n)),
        rng.integers(0, cfg.num_classes, size=2),
        rng.normal(size=(2, rf_width)),
    )

    def loss() -> float:
        logits, _ = model.forward(batch)
        return softmax_ce(logits, batch.labels)[0]

    logits, cache = model.forward(batch)
    _, _, dlogits = softmax_ce(logits, batch.labels)
    grads = model.backward(cache, dlogits)
    report = check_gradients(loss, model.params, grads, coords_per_tensor, seed)
    logger.info("fusion gradcheck max rel error %.3g", report.max_rel_error)
    return report.errors
