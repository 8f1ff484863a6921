"""
Checkpoint headers, model-to-pipeline links and training logs.
"""

from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict

ModelKind = Literal["fusion", "cnn", "svm"]


class TensorEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str
    shape: list[int]
    offset: int


class CheckpointHeader(BaseModel):
    """`<name>.json` next to a `<name>.raw` float64 payload."""
    model_config = ConfigDict(extra="forbid")

    kind: ModelKind
    model: dict[str, Any]
    rf_width: Optional[int] = None
    seed: int = 0
    epoch: int = 0
    dtype: Literal["float64"] = "float64"
    byte_order: Literal["little"] = "little"
    tensors: list[TensorEntry]


class ModelLink(BaseModel):
    """Ties a checkpoint that consumes RF to the selection pipeline it was trained against."""
    model_config = ConfigDict(extra="forbid")

    pipeline_sha256: str
    rf_width: int


class EpochRecord(BaseModel):
    epoch: int
    train_loss: float
    train_accuracy: float
    val_loss: float
    val_accuracy: float


class TrainingLog(BaseModel):
    epochs: list[EpochRecord] = []
    best_epoch: int = 0
    stopped_early: bool = False
