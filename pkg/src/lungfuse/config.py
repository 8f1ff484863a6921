"""
Run configuration — one JSON document, validated before any work starts.

Every section forbids unknown keys. `RunConfig.desk()` is the default preset;
`RunConfig.full_scale()` carries the full-scale architecture and class counts.
"""

import json
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from lungfuse.errors import ArtifactError, ConfigError
from lungfuse.models.labels import LABEL_NAMES, NUM_CLASSES

SCHEMA_VERSION = 1


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class PhantomConfig(_Section):
    class_counts: dict[str, int] = Field(default_factory=lambda: {"AAH": 40, "AIS": 34, "MIA": 13, "IA": 82})
    patch_size: int = Field(32, ge=4)
    spacing_mm: float = Field(1.0, gt=0)
    radius_range: tuple[float, float] = (5.0, 10.0)
    class_solid_fraction: dict[str, float] = Field(
        default_factory=lambda: {"AAH": 0.15, "AIS": 0.35, "MIA": 0.60, "IA": 0.85}
    )
    solid_fraction_jitter: float = Field(0.12, ge=0)
    texture_amplitude: float = Field(60.0, ge=0)
    texture_frequencies: tuple[float, float, float, float] = (0.10, 0.17, 0.24, 0.31)
    noise_sigma: float = Field(20.0, ge=0)
    seed: int = 0

    @field_validator("class_counts", "class_solid_fraction")
    @classmethod
    def _label_keys(cls, value: dict) -> dict:
        unknown = set(value) - set(LABEL_NAMES)
        if unknown:
            raise ValueError(f"unknown labels: {sorted(unknown)}")
        return value

    @field_validator("class_counts")
    @classmethod
    def _counts(cls, value: dict[str, int]) -> dict[str, int]:
        if any(c < 0 for c in value.values()):
            raise ValueError("class counts must be >= 0")
        if sum(value.values()) < 1:
            raise ValueError("class counts must total at least 1")
        return value

    @field_validator("radius_range")
    @classmethod
    def _radius(cls, value: tuple[float, float]) -> tuple[float, float]:
        if not 0 < value[0] <= value[1]:
            raise ValueError("radius_range must satisfy 0 < min <= max")
        return value


class RadiomicsConfig(_Section):
    bin_width: float = Field(25.0, gt=0)
    extra_bin_widths: list[float] = Field(default_factory=list)
    glcm_distances: list[int] = Field(default_factory=lambda: [1])
    first_order: bool = True
    shape: bool = True
    glcm: bool = True
    glrlm: bool = True
    wavelet: bool = True
    mesh_smoothing_sigma: float = Field(0.75, ge=0)

    @field_validator("extra_bin_widths")
    @classmethod
    def _widths(cls, value: list[float]) -> list[float]:
        if any(w <= 0 for w in value):
            raise ValueError("bin widths must be > 0")
        return value

    @field_validator("glcm_distances")
    @classmethod
    def _distances(cls, value: list[int]) -> list[int]:
        if not value or any(d < 1 for d in value):
            raise ValueError("glcm_distances must be a non-empty list of ints >= 1")
        return value


class SelectionConfig(_Section):
    variance_threshold: float = Field(0.8, ge=0)
    k: int = Field(200, ge=1)
    lambda_grid_size: int = Field(50, ge=1)
    lambda_min_ratio: float = Field(1e-3, gt=0, lt=1)
    folds: int = Field(5, ge=2)
    fixed_lambda: Optional[float] = Field(None, ge=0)
    max_features: Optional[int] = Field(None, ge=1)
    min_features: int = Field(1, ge=1)
    tol: float = Field(1e-8, gt=0)
    max_sweeps: int = Field(10_000, ge=1)
    seed: int = 0


class ModelConfig(_Section):
    patch_size: int = Field(32, ge=4)
    embedding_dim: int = Field(64, ge=1)
    conversion_dim: int = Field(512, ge=1)
    fusion_dim: int = Field(256, ge=1)
    stem_channels: int = Field(8, ge=1)
    block_channels: Optional[list[int]] = None
    encoder_depth: int = Field(3, ge=1)
    num_classes: int = NUM_CLASSES
    intensity_window: tuple[float, float] = (-1000.0, 400.0)
    svm_c: float = Field(1.0, gt=0)
    svm_epochs: int = Field(500, ge=1)
    svm_learning_rate: float = Field(0.5, gt=0)

    @model_validator(mode="after")
    def _channels(self) -> "ModelConfig":
        widths = self.encoder_widths()
        if len(widths) != self.encoder_depth:
            raise ValueError("block_channels must have encoder_depth entries")
        if widths[-1] != self.embedding_dim:
            raise ValueError("last block width must equal embedding_dim")
        prev = self.stem_channels
        for w in widths:
            if w < prev:
                raise ValueError("block widths must be non-decreasing from stem_channels")
            prev = w
        if self.intensity_window[0] >= self.intensity_window[1]:
            raise ValueError("intensity_window must be increasing")
        return self

    def encoder_widths(self) -> list[int]:
        """Per-block output channels; halves backwards from embedding_dim by default."""
        if self.block_channels is not None:
            return list(self.block_channels)
        widths = [max(self.embedding_dim >> (self.encoder_depth - 1 - i), self.stem_channels)
                  for i in range(self.encoder_depth)]
        widths[-1] = self.embedding_dim
        return widths


class SGDConfig(_Section):
    learning_rate: float = Field(0.001, gt=0)
    momentum: float = Field(0.9, ge=0, lt=1)
    batch_size: int = Field(8, ge=1)
    max_epochs: int = Field(20, ge=1)
    patience: int = Field(5, ge=1)
    seed: int = 0
    val_fraction: float = Field(0.2, gt=0, lt=1)


class EvalConfig(_Section):
    train_fraction: float = Field(0.8, gt=0, le=1)
    seeds: list[int] = Field(default_factory=lambda: [0, 1, 2, 3, 4])
    stratified: bool = True


class PathsConfig(_Section):
    work_dir: str = "runs"


class RunConfig(_Section):
    schema_version: int = SCHEMA_VERSION
    phantom: PhantomConfig = Field(default_factory=PhantomConfig)
    radiomics: RadiomicsConfig = Field(default_factory=RadiomicsConfig)
    selection: SelectionConfig = Field(default_factory=SelectionConfig)
    model: ModelConfig = Field(default_factory=ModelConfig)
    trainer: SGDConfig = Field(default_factory=SGDConfig)
    eval: EvalConfig = Field(default_factory=EvalConfig)
    paths: PathsConfig = Field(default_factory=PathsConfig)

    @field_validator("schema_version")
    @classmethod
    def _version(cls, value: int) -> int:
        if value != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {value}, expected {SCHEMA_VERSION}")
        return value

    @model_validator(mode="after")
    def _patch_sizes(self) -> "RunConfig":
        if self.model.patch_size != self.phantom.patch_size:
            raise ValueError("model.patch_size must equal phantom.patch_size")
        return self

    @classmethod
    def desk(cls) -> "RunConfig":
        return cls()

    @classmethod
    def full_scale(cls) -> "RunConfig":
        """Full-scale preset: 676 patients, 64³ patches, 2048-d deep features."""
        return cls(
            phantom=PhantomConfig(
                class_counts={"AAH": 158, "AIS": 136, "MIA": 53, "IA": 329},
                patch_size=64,
                radius_range=(5.0, 20.0),
            ),
            model=ModelConfig(
                patch_size=64,
                embedding_dim=2048,
                stem_channels=64,
                block_channels=[256, 512, 1024, 2048],
                encoder_depth=4,
            ),
            eval=EvalConfig(seeds=[0]),
        )

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        try:
            return cls.model_validate(data)
        except ValidationError as e:
            raise ConfigError("invalid run configuration", details={"errors": e.errors(include_url=False)}) from e

    @classmethod
    def load(cls, path: "str | Path | None") -> "RunConfig":
        if path is None:
            return cls.desk()
        try:
            data = json.loads(Path(path).read_text())
        except FileNotFoundError as e:
            raise ArtifactError(f"config file not found: {path}", code="missing_input") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"config is not valid JSON: {e}") from e
        return cls.from_dict(data)

    def with_seed(self, seed: int) -> "RunConfig":
        """Copy with every seeded section pointed at `seed`."""
        return self.model_copy(update={
            "phantom": self.phantom.model_copy(update={"seed": seed}),
            "selection": self.selection.model_copy(update={"seed": seed}),
            "trainer": self.trainer.model_copy(update={"seed": seed}),
        })

    def dump(self) -> str:
        return json.dumps(self.model_dump(mode="json"), indent=2)
