"""
lungfuse — invasiveness grading of lung nodules by fusing radiomics and deep features.

Synthetic CT phantoms, a radiomics extractor, a variance/K-best/Lasso
selection pipeline and a numpy 3D residual network whose embedding is fused
with the selected radiomics vector.
"""

from lungfuse.config import RunConfig
from lungfuse.errors import (
    ArtifactError,
    ConfigError,
    EvaluationError,
    FeatureError,
    LungFuseError,
    ModelError,
    SelectionError,
    VolumeError,
)
from lungfuse.models.labels import InvasivenessLabel
from lungfuse.volume import Dataset, Mask, NoduleSample, Volume

__version__ = "0.1.0"
__all__ = [
    "RunConfig",
    "InvasivenessLabel",
    "Volume",
    "Mask",
    "NoduleSample",
    "Dataset",
    "LungFuseError",
    "ConfigError",
    "VolumeError",
    "FeatureError",
    "SelectionError",
    "ModelError",
    "ArtifactError",
    "EvaluationError",
]
