"""
Layer kernels with hand-written backward passes.

Activations are batched (N, C, X, Y, Z) for convolutions and (N, F) for
dense layers; single unbatched inputs are accepted and returned unbatched.
Everything runs in float64.
"""

import math
from typing import Union

import numpy as np

from lungfuse.errors import ModelError

Label = Union[int, np.ndarray]


def he_uniform(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int) -> np.ndarray:
    limit = math.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, size=shape)


def window_intensity(voxels: np.ndarray, window: tuple[float, float]) -> np.ndarray:
    """Clip to `window` and map linearly onto [-1, 1]."""
    lo, hi = window
    clipped = np.clip(np.asarray(voxels, dtype=np.float64), lo, hi)
    return 2.0 * (clipped - lo) / (hi - lo) - 1.0


# ── Dense ──


class DenseLayer:
    __slots__ = ("weight", "bias")

    def __init__(self, weight: np.ndarray, bias: np.ndarray):
        weight = np.asarray(weight, dtype=np.float64)
        bias = np.asarray(bias, dtype=np.float64)
        if weight.ndim != 2 or bias.shape != (weight.shape[0],):
            raise ModelError(
                "dense layer shapes are inconsistent",
                code="shape_mismatch",
                details={"weight": list(weight.shape), "bias": list(bias.shape)},
            )
        self.weight = weight
        self.bias = bias

    @classmethod
    def init(cls, rng: np.random.Generator, n_in: int, n_out: int) -> "DenseLayer":
        return cls(he_uniform(rng, (n_out, n_in), n_in), np.zeros(n_out))

    @property
    def n_in(self) -> int:
        return self.weight.shape[1]

    @property
    def n_out(self) -> int:
        return self.weight.shape[0]


def _dense_input(layer: DenseLayer, x: np.ndarray) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    x2 = x[None] if single else x
    if x2.ndim != 2 or x2.shape[1] != layer.n_in:
        raise ModelError(
            f"dense layer expects {layer.n_in} inputs",
            code="shape_mismatch",
            details={"input": list(x.shape)},
        )
    return x2, single


def dense_forward(layer: DenseLayer, x: np.ndarray) -> np.ndarray:
    x2, single = _dense_input(layer, x)
    y = x2 @ layer.weight.T + layer.bias
    return y[0] if single else y


def dense_backward(layer: DenseLayer, x: np.ndarray, dy: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns (dx, dW, db), summed over the batch."""
    x2, single = _dense_input(layer, x)
    dy2 = np.asarray(dy, dtype=np.float64).reshape(x2.shape[0], layer.n_out)
    dx = dy2 @ layer.weight
    return (dx[0] if single else dx), dy2.T @ x2, dy2.sum(axis=0)


# ── Conv3D ──


class Conv3DLayer:
    """Same-padded 3D convolution; kernels are (out, in, kx, ky, kz)."""

    __slots__ = ("kernels", "bias", "stride")

    def __init__(self, kernels: np.ndarray, bias: np.ndarray, stride: int = 1):
        kernels = np.asarray(kernels, dtype=np.float64)
        bias = np.asarray(bias, dtype=np.float64)
        if kernels.ndim != 5 or bias.shape != (kernels.shape[0],):
            raise ModelError(
                "conv layer shapes are inconsistent",
                code="shape_mismatch",
                details={"kernels": list(kernels.shape), "bias": list(bias.shape)},
            )
        if any(k % 2 == 0 for k in kernels.shape[2:]):
            raise ModelError(
                "same padding needs odd kernel extents",
                code="even_kernel",
                details={"kernel": list(kernels.shape[2:])},
            )
        if stride < 1:
            raise ModelError("stride must be >= 1", details={"stride": stride})
        self.kernels = kernels
        self.bias = bias
        self.stride = stride

    @classmethod
    def init(cls, rng: np.random.Generator, c_in: int, c_out: int, size: int = 3, stride: int = 1) -> "Conv3DLayer":
        shape = (c_out, c_in, size, size, size)
        return cls(he_uniform(rng, shape, c_in * size**3), np.zeros(c_out), stride)

    @property
    def c_in(self) -> int:
        return self.kernels.shape[1]

    @property
    def c_out(self) -> int:
        return self.kernels.shape[0]


def same_padding(n: int, k: int, s: int) -> tuple[int, int, int]:
    """(output extent, pad before, pad after) for one axis."""
    out = -(-n // s)
    total = max((out - 1) * s + k - n, 0)
    return out, total // 2, total - total // 2


def _conv_input(layer: Conv3DLayer, x: np.ndarray) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 4
    x5 = x[None] if single else x
    if x5.ndim != 5 or x5.shape[1] != layer.c_in:
        raise ModelError(
            f"conv layer expects {layer.c_in} input channels",
            code="shape_mismatch",
            details={"input": list(x.shape)},
        )
    return x5, single


def _pad(layer: Conv3DLayer, x5: np.ndarray) -> tuple[np.ndarray, tuple[int, ...], list[tuple[int, int]]]:
    geometry = [same_padding(n, k, layer.stride) for n, k in zip(x5.shape[2:], layer.kernels.shape[2:])]
    out_dims = tuple(g[0] for g in geometry)
    widths = [(g[1], g[2]) for g in geometry]
    return np.pad(x5, [(0, 0), (0, 0), *widths]), out_dims, widths


def _window(layer: Conv3DLayer, offset: tuple[int, int, int], out_dims: tuple[int, ...]) -> tuple:
    s = layer.stride
    return (slice(None), slice(None)) + tuple(
        slice(o, o + s * (n - 1) + 1, s) for o, n in zip(offset, out_dims)
    )


def _offsets(layer: Conv3DLayer):
    kx, ky, kz = layer.kernels.shape[2:]
    for a in range(kx):
        for b in range(ky):
            for c in range(kz):
                yield a, b, c


def conv3d_forward(layer: Conv3DLayer, x: np.ndarray) -> np.ndarray:
    x5, single = _conv_input(layer, x)
    xp, out_dims, _ = _pad(layer, x5)
    y = np.zeros((x5.shape[0], layer.c_out, *out_dims))
    for off in _offsets(layer):
        y += np.einsum("oc,ncxyz->noxyz", layer.kernels[(slice(None), slice(None), *off)], xp[_window(layer, off, out_dims)])
    y += layer.bias[None, :, None, None, None]
    return y[0] if single else y


def conv3d_backward(layer: Conv3DLayer, x: np.ndarray, dy: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns (dx, dkernels, dbias), summed over the batch."""
    x5, single = _conv_input(layer, x)
    xp, out_dims, widths = _pad(layer, x5)
    dy5 = np.asarray(dy, dtype=np.float64).reshape(x5.shape[0], layer.c_out, *out_dims)
    dxp = np.zeros_like(xp)
    dk = np.zeros_like(layer.kernels)
    for off in _offsets(layer):
        window = _window(layer, off, out_dims)
        k_index = (slice(None), slice(None), *off)
        dk[k_index] = np.einsum("noxyz,ncxyz->oc", dy5, xp[window])
        dxp[window] += np.einsum("oc,noxyz->ncxyz", layer.kernels[k_index], dy5)
    inner = (slice(None), slice(None)) + tuple(slice(lo, lo + n) for (lo, _), n in zip(widths, x5.shape[2:]))
    dx = dxp[inner]
    return (dx[0] if single else dx), dk, dy5.sum(axis=(0, 2, 3, 4))


# ── Activations, pooling, loss ──


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def relu_backward(x: np.ndarray, dy: np.ndarray) -> np.ndarray:
    return np.where(x > 0, dy, 0.0)


def global_avg_pool(x: np.ndarray) -> np.ndarray:
    """(…, C, X, Y, Z) → (…, C)."""
    return np.asarray(x, dtype=np.float64).mean(axis=(-3, -2, -1))


def global_avg_pool_backward(x_shape: tuple[int, ...], dy: np.ndarray) -> np.ndarray:
    n_vox = int(np.prod(x_shape[-3:]))
    return np.broadcast_to(np.asarray(dy)[..., None, None, None] / n_vox, x_shape).copy()


def softmax(logits: np.ndarray) -> np.ndarray:
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_ce(logits: np.ndarray, label: Label) -> tuple[float, np.ndarray, np.ndarray]:
    """Cross-entropy against integer labels.

    For a single logit vector returns (−log p[label], p, p − onehot). For a
    batch (N, C) the loss and gradient are averaged over N.
    """
    z = np.asarray(logits, dtype=np.float64)
    if not np.all(np.isfinite(z)):
        raise ModelError("logits must be finite", code="non_finite_logits")
    single = z.ndim == 1
    z2 = z[None] if single else z
    labels = np.atleast_1d(np.asarray(label, dtype=np.int64))
    n, c = z2.shape
    if labels.shape != (n,) or labels.min() < 0 or labels.max() >= c:
        raise ModelError("labels must index the logits", code="invalid_label", details={"classes": c})
    shifted = z2 - z2.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    log_p = shifted - log_norm[:, None]
    probs = np.exp(log_p)
    rows = np.arange(n)
    losses = -log_p[rows, labels]
    grad = probs.copy()
    grad[rows, labels] -= 1.0
    if single:
        return float(losses[0]), probs[0], grad[0]
    return float(losses.mean()), probs, grad / n
