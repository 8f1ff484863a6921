"""
3D residual encoder: patch → deep embedding (DF).

stem conv (stride 2) + ReLU, then per block
    conv 3³ stride 2 → ReLU → conv 3³ stride 1, plus a strided identity skip
    (every second voxel, channels zero-padded), → ReLU,
then global average pooling to `embedding_dim` channels.
"""

from typing import Any

import numpy as np

from lungfuse.config import ModelConfig
from lungfuse.errors import ModelError
from lungfuse.nn.layers import (
    Conv3DLayer,
    conv3d_backward,
    conv3d_forward,
    global_avg_pool,
    global_avg_pool_backward,
    relu,
    relu_backward,
    window_intensity,
)

Params = dict[str, np.ndarray]


def init_encoder(cfg: ModelConfig, rng: np.random.Generator, prefix: str = "encoder.") -> Params:
    params: Params = {}

    def add(name: str, layer: Conv3DLayer) -> None:
        params[f"{prefix}{name}.kernels"] = layer.kernels
        params[f"{prefix}{name}.bias"] = layer.bias

    add("stem", Conv3DLayer.init(rng, 1, cfg.stem_channels, stride=2))
    c_in = cfg.stem_channels
    for i, c_out in enumerate(cfg.encoder_widths()):
        add(f"block{i}.conv1", Conv3DLayer.init(rng, c_in, c_out, stride=2))
        add(f"block{i}.conv2", Conv3DLayer.init(rng, c_out, c_out, stride=1))
        c_in = c_out
    return params


def _conv(params: Params, prefix: str, name: str, stride: int) -> Conv3DLayer:
    return Conv3DLayer(params[f"{prefix}{name}.kernels"], params[f"{prefix}{name}.bias"], stride)


def strided_skip(h: np.ndarray, c_out: int) -> np.ndarray:
    sub = h[:, :, ::2, ::2, ::2]
    pad = c_out - sub.shape[1]
    return np.pad(sub, [(0, 0), (0, pad), (0, 0), (0, 0), (0, 0)]) if pad else sub


def prepare_patches(patches: np.ndarray, cfg: ModelConfig) -> np.ndarray:
    """(N, X, Y, Z) HU patches → windowed (N, 1, X, Y, Z)."""
    patches = np.asarray(patches, dtype=np.float64)
    n = cfg.patch_size
    if patches.ndim != 4 or patches.shape[1:] != (n, n, n):
        raise ModelError(
            f"encoder expects patches of {n}³",
            code="shape_mismatch",
            details={"patches": list(patches.shape)},
        )
    return window_intensity(patches, cfg.intensity_window)[:, None]


def encoder_forward(params: Params, cfg: ModelConfig, patches: np.ndarray, prefix: str = "encoder.") -> tuple[np.ndarray, dict[str, Any]]:
    x = prepare_patches(patches, cfg)
    stem_pre = conv3d_forward(_conv(params, prefix, "stem", 2), x)
    h = relu(stem_pre)
    blocks = []
    for i, c_out in enumerate(cfg.encoder_widths()):
        a = conv3d_forward(_conv(params, prefix, f"block{i}.conv1", 2), h)
        r = relu(a)
        pre = conv3d_forward(_conv(params, prefix, f"block{i}.conv2", 1), r) + strided_skip(h, c_out)
        blocks.append({"h_in": h, "a": a, "r": r, "pre": pre})
        h = relu(pre)
    cache = {"x": x, "stem_pre": stem_pre, "blocks": blocks, "h_out": h}
    return global_avg_pool(h), cache


def encoder_backward(params: Params, cfg: ModelConfig, cache: dict[str, Any], d_embedding: np.ndarray, prefix: str = "encoder.") -> Params:
    grads: Params = {}

    def store(name: str, dk: np.ndarray, db: np.ndarray) -> None:
        grads[f"{prefix}{name}.kernels"] = dk
        grads[f"{prefix}{name}.bias"] = db

    d_h = global_avg_pool_backward(cache["h_out"].shape, d_embedding)
    for i in reversed(range(len(cache["blocks"]))):
        block = cache["blocks"][i]
        d_pre = relu_backward(block["pre"], d_h)
        d_r, dk, db = conv3d_backward(_conv(params, prefix, f"block{i}.conv2", 1), block["r"], d_pre)
        store(f"block{i}.conv2", dk, db)
        d_a = relu_backward(block["a"], d_r)
        d_h, dk, db = conv3d_backward(_conv(params, prefix, f"block{i}.conv1", 2), block["h_in"], d_a)
        store(f"block{i}.conv1", dk, db)
        c_in = block["h_in"].shape[1]
        d_h[:, :, ::2, ::2, ::2] += d_pre[:, :c_in]
    d_stem = relu_backward(cache["stem_pre"], d_h)
    _, dk, db = conv3d_backward(_conv(params, prefix, "stem", 2), cache["x"], d_stem)
    store("stem", dk, db)
    return grads
