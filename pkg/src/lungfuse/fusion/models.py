"""
Trainable classifiers over nodule patches.

FusionModel:
    RF → conv_rf (R→C) → ReLU ┐
                               ├ concat [rf, df] → fusion (2C→F) → ReLU → classifier (F→classes)
    patch → encoder → DF → conv_df (D→C) → ReLU ┘
CNNModel:
    patch → encoder → DF → classifier (D→classes)

All parameters live in one flat `params` dict; layers are views over it, so
replacing or perturbing an entry is seen by the next forward pass.
"""

from typing import Any, Optional, Protocol

import numpy as np

from lungfuse.config import ModelConfig
from lungfuse.errors import ModelError
from lungfuse.fusion.encoder import encoder_backward, encoder_forward, init_encoder
from lungfuse.nn.layers import DenseLayer, dense_backward, dense_forward, relu, relu_backward, softmax

Params = dict[str, np.ndarray]


class Batch:
    """Patches (N, X, Y, Z) with labels and, for fusion, the RF rows (N, R)."""

    __slots__ = ("patches", "labels", "rf")

    def __init__(self, patches: np.ndarray, labels: np.ndarray, rf: Optional[np.ndarray] = None):
        self.patches = np.asarray(patches, dtype=np.float64)
        self.labels = np.asarray(labels, dtype=np.int64)
        self.rf = None if rf is None else np.asarray(rf, dtype=np.float64)
        n = self.labels.shape[0]
        if self.patches.shape[0] != n or (self.rf is not None and self.rf.shape[0] != n):
            raise ModelError("batch parts have different lengths", code="shape_mismatch")

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    def take(self, index: np.ndarray) -> "Batch":
        return Batch(self.patches[index], self.labels[index], None if self.rf is None else self.rf[index])


class Classifier(Protocol):
    kind: str
    cfg: ModelConfig
    params: Params

    def forward(self, batch: Batch) -> tuple[np.ndarray, dict[str, Any]]: ...

    def backward(self, cache: dict[str, Any], dlogits: np.ndarray) -> Params: ...

    def predict_proba(self, batch: Batch) -> np.ndarray: ...


def _dense(params: Params, name: str) -> DenseLayer:
    return DenseLayer(params[f"{name}.weight"], params[f"{name}.bias"])


def _add_dense(params: Params, name: str, layer: DenseLayer) -> None:
    params[f"{name}.weight"] = layer.weight
    params[f"{name}.bias"] = layer.bias


def _store(grads: Params, name: str, dw: np.ndarray, db: np.ndarray) -> None:
    grads[f"{name}.weight"] = dw
    grads[f"{name}.bias"] = db


def init_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng([seed, 0])


class _Model:
    kind = ""

    def __init__(self, cfg: ModelConfig, params: Params):
        self.cfg = cfg
        self.params = params

    def predict_proba(self, batch: Batch) -> np.ndarray:
        logits, _ = self.forward(batch)  # type: ignore[attr-defined]
        return softmax(logits)

    def predict(self, batch: Batch) -> np.ndarray:
        return np.argmax(self.predict_proba(batch), axis=1)


class FusionModel(_Model):
    kind = "fusion"

    def __init__(self, cfg: ModelConfig, params: Params, rf_width: int):
        super().__init__(cfg, params)
        self.rf_width = rf_width

    @classmethod
    def init(cls, cfg: ModelConfig, rf_width: int, seed: int = 0) -> "FusionModel":
        if rf_width < 1:
            raise ModelError("fusion model needs at least one radiomics feature", code="rf_width_mismatch")
        rng = init_rng(seed)
        params = init_encoder(cfg, rng)
        _add_dense(params, "conv_rf", DenseLayer.init(rng, rf_width, cfg.conversion_dim))
        _add_dense(params, "conv_df", DenseLayer.init(rng, cfg.embedding_dim, cfg.conversion_dim))
        _add_dense(params, "fusion", DenseLayer.init(rng, 2 * cfg.conversion_dim, cfg.fusion_dim))
        _add_dense(params, "classifier", DenseLayer.init(rng, cfg.fusion_dim, cfg.num_classes))
        return cls(cfg, params, rf_width)

    def forward(self, batch: Batch) -> tuple[np.ndarray, dict[str, Any]]:
        if batch.rf is None or batch.rf.ndim != 2 or batch.rf.shape[1] != self.rf_width:
            raise ModelError(
                f"fusion model expects {self.rf_width} radiomics features",
                code="rf_width_mismatch",
                details={"rf": None if batch.rf is None else list(batch.rf.shape)},
            )
        df, enc_cache = encoder_forward(self.params, self.cfg, batch.patches)
        rf_pre = dense_forward(_dense(self.params, "conv_rf"), batch.rf)
        df_pre = dense_forward(_dense(self.params, "conv_df"), df)
        joint = np.concatenate([relu(rf_pre), relu(df_pre)], axis=1)
        fused_pre = dense_forward(_dense(self.params, "fusion"), joint)
        fused = relu(fused_pre)
        logits = dense_forward(_dense(self.params, "classifier"), fused)
        cache = {
            "encoder": enc_cache, "rf": batch.rf, "df": df, "rf_pre": rf_pre, "df_pre": df_pre,
            "joint": joint, "fused_pre": fused_pre, "fused": fused,
        }
        return logits, cache

    def backward(self, cache: dict[str, Any], dlogits: np.ndarray) -> Params:
        grads: Params = {}
        d_fused, dw, db = dense_backward(_dense(self.params, "classifier"), cache["fused"], dlogits)
        _store(grads, "classifier", dw, db)
        d_joint, dw, db = dense_backward(_dense(self.params, "fusion"), cache["joint"], relu_backward(cache["fused_pre"], d_fused))
        _store(grads, "fusion", dw, db)
        c = self.cfg.conversion_dim
        _, dw, db = dense_backward(_dense(self.params, "conv_rf"), cache["rf"], relu_backward(cache["rf_pre"], d_joint[:, :c]))
        _store(grads, "conv_rf", dw, db)
        d_df, dw, db = dense_backward(_dense(self.params, "conv_df"), cache["df"], relu_backward(cache["df_pre"], d_joint[:, c:]))
        _store(grads, "conv_df", dw, db)
        grads.update(encoder_backward(self.params, self.cfg, cache["encoder"], d_df))
        return grads


class CNNModel(_Model):
    kind = "cnn"

    @classmethod
    def init(cls, cfg: ModelConfig, seed: int = 0) -> "CNNModel":
        rng = init_rng(seed)
        params = init_encoder(cfg, rng)
        _add_dense(params, "classifier", DenseLayer.init(rng, cfg.embedding_dim, cfg.num_classes))
        return cls(cfg, params)

    def forward(self, batch: Batch) -> tuple[np.ndarray, dict[str, Any]]:
        df, enc_cache = encoder_forward(self.params, self.cfg, batch.patches)
        logits = dense_forward(_dense(self.params, "classifier"), df)
        return logits, {"encoder": enc_cache, "df": df}

    def backward(self, cache: dict[str, Any], dlogits: np.ndarray) -> Params:
        grads: Params = {}
        d_df, dw, db = dense_backward(_dense(self.params, "classifier"), cache["df"], dlogits)
        _store(grads, "classifier", dw, db)
        grads.update(encoder_backward(self.params, self.cfg, cache["encoder"], d_df))
        return grads


def fusion_forward(model: FusionModel, rf: np.ndarray, patch: np.ndarray) -> tuple[np.ndarray, np.ndarray, dict[str, Any]]:
    """Single sample (rf: (R,), patch: (X, Y, Z)) or a batch; returns (probs, logits, cache)."""
    rf = np.asarray(rf, dtype=np.float64)
    patch = np.asarray(patch, dtype=np.float64)
    single = rf.ndim == 1
    batch = Batch(patch[None] if single else patch, np.zeros(1 if single else rf.shape[0], dtype=np.int64), rf[None] if single else rf)
    logits, cache = model.forward(batch)
    probs = softmax(logits)
    if single:
        return probs[0], logits[0], cache
    return probs, logits, cache
