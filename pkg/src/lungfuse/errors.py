"""
lungfuse error types — one class per failing stage of the pipeline.
"""

from typing import Any, Optional


class LungFuseError(Exception):
    def __init__(self, code: str, message: str, details: Optional[dict[str, Any]] = None):
        super().__init__(message)
        self.code = code
        self.details = details

    def to_dict(self) -> dict[str, Any]:
        """Machine-readable form printed by the CLI on failure."""
        return {"error": self.code, "message": str(self), "details": self.details}


class ConfigError(LungFuseError):
    def __init__(self, message: str, code: str = "config_error", details: Optional[dict[str, Any]] = None):
        super().__init__(code, message, details)


class VolumeError(LungFuseError):
    def __init__(self, message: str, code: str = "volume_error", details: Optional[dict[str, Any]] = None):
        super().__init__(code, message, details)


class FeatureError(LungFuseError):
    def __init__(self, message: str, code: str = "feature_error", details: Optional[dict[str, Any]] = None):
        super().__init__(code, message, details)


class SelectionError(LungFuseError):
    def __init__(self, message: str, code: str = "selection_error", details: Optional[dict[str, Any]] = None):
        super().__init__(code, message, details)


class ModelError(LungFuseError):
    def __init__(self, message: str, code: str = "model_error", details: Optional[dict[str, Any]] = None):
        super().__init__(code, message, details)


class ArtifactError(LungFuseError):
    def __init__(self, message: str, code: str = "artifact_error", details: Optional[dict[str, Any]] = None):
        super().__init__(code, message, details)


class EvaluationError(LungFuseError):
    def __init__(self, message: str, code: str = "evaluation_error", details: Optional[dict[str, Any]] = None):
        super().__init__(code, message, details)
