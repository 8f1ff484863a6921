"""
Deterministic synthetic nodule phantoms standing in for segmented CT patches.

Each class carries two independent cues:
  - solid fraction: drives the interior attenuation and how round the
    ellipsoid is (visible to radiomics shape/intensity features);
  - a plane-wave texture of class-indexed spatial frequency inside the
    nodule (visible to the convolutional encoder).
"""

import logging
from collections.abc import Mapping
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from lungfuse.config import PhantomConfig
from lungfuse.errors import VolumeError
from lungfuse.models.labels import InvasivenessLabel
from lungfuse.volume import Dataset, Mask, NoduleSample, Volume

logger = logging.getLogger(__name__)

BACKGROUND_HU = -850.0
GROUND_GLASS_HU = -650.0
SOLID_HU = 0.0
DEFAULT_TEXTURE_FREQUENCIES = (0.10, 0.17, 0.24, 0.31)  # cycles per voxel, indexed by label
DEFAULT_CLASS_SOLID_FRACTION = {
    InvasivenessLabel.AAH: 0.15,
    InvasivenessLabel.AIS: 0.35,
    InvasivenessLabel.MIA: 0.60,
    InvasivenessLabel.IA: 0.85,
}


class PhantomSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)

    label: InvasivenessLabel = Field(alias="class")
    patch_size: int = Field(32, ge=4)
    radius_range: tuple[float, float] = (5.0, 10.0)
    solid_fraction: float = Field(0.5, ge=0, le=1)
    texture_amplitude: float = Field(60.0, ge=0)
    texture_frequencies: tuple[float, float, float, float] = DEFAULT_TEXTURE_FREQUENCIES
    noise_sigma: float = Field(20.0, ge=0)
    spacing_mm: float = Field(1.0, gt=0)
    seed: int = Field(0, ge=0, lt=2**64)

    @field_validator("radius_range")
    @classmethod
    def _radius_order(cls, value: tuple[float, float]) -> tuple[float, float]:
        if not 0 < value[0] <= value[1]:
            raise ValueError("radius_range must satisfy 0 < min <= max")
        return value

    @classmethod
    def from_config(cls, cfg: PhantomConfig, label: InvasivenessLabel = InvasivenessLabel.AAH) -> "PhantomSpec":
        return cls(
            label=label,
            patch_size=cfg.patch_size,
            radius_range=cfg.radius_range,
            solid_fraction=cfg.class_solid_fraction.get(label.name, DEFAULT_CLASS_SOLID_FRACTION[label]),
            texture_amplitude=cfg.texture_amplitude,
            texture_frequencies=cfg.texture_frequencies,
            noise_sigma=cfg.noise_sigma,
            spacing_mm=cfg.spacing_mm,
            seed=cfg.seed,
        )


def base_intensity(solid_fraction: float) -> float:
    """Interior attenuation, ground-glass at 0 and solid at 1."""
    return GROUND_GLASS_HU + solid_fraction * (SOLID_HU - GROUND_GLASS_HU)


def minor_axis_ratio(solid_fraction: float) -> float:
    return 1.0 - 0.4 * (1.0 - solid_fraction)


def derive_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1, dtype=np.uint64)[0])


def generate_phantom(spec: PhantomSpec, sample_id: Optional[str] = None) -> NoduleSample:
    """Render one phantom. Equal specs give bit-identical samples."""
    rng = np.random.default_rng(spec.seed)
    n = spec.patch_size
    sp = spec.spacing_mm
    limit = (n - 1) / 2 * sp
    if spec.radius_range[1] > limit:
        raise VolumeError(
            "phantom radius exceeds patch bounds",
            code="radius_out_of_bounds",
            details={"radius_mm": spec.radius_range[1], "limit_mm": limit},
        )

    radius = float(rng.uniform(*spec.radius_range))
    amp_jitter = float(rng.uniform(0.75, 1.25))
    direction = rng.normal(size=3)
    direction /= np.linalg.norm(direction)
    phase = float(rng.uniform(0.0, 2.0 * np.pi))
    noise = rng.normal(0.0, 1.0, size=(n, n, n))

    q = minor_axis_ratio(spec.solid_fraction)
    axes = np.array([radius, radius * q, radius * q])
    center = (n - 1) / 2.0
    grid = (np.indices((n, n, n), dtype=np.float64) - center) * sp
    inside = (
        (grid[0] / axes[0]) ** 2 + (grid[1] / axes[1]) ** 2 + (grid[2] / axes[2]) ** 2
    ) <= 1.0
    if not inside.any():
        raise VolumeError("phantom ellipsoid contains no voxel centers", details={"radius_mm": radius})

    freq = spec.texture_frequencies[int(spec.label)]
    projection = np.tensordot(direction, grid / sp, axes=1)
    texture = spec.texture_amplitude * amp_jitter * np.sin(2.0 * np.pi * freq * projection + phase)

    voxels = np.full((n, n, n), BACKGROUND_HU)
    voxels[inside] = base_intensity(spec.solid_fraction) + texture[inside]
    voxels += spec.noise_sigma * noise

    sid = sample_id or f"phantom-{spec.seed}"
    spacing = (sp, sp, sp)
    return NoduleSample(sid, Volume(voxels.astype(np.float32), spacing), Mask(inside), spec.label)


def generate_dataset(
    class_counts: Mapping["InvasivenessLabel | str | int", int],
    base_spec: PhantomSpec,
    seed: int,
    class_solid_fraction: Optional[Mapping[InvasivenessLabel, float]] = None,
    solid_fraction_jitter: float = 0.0,
) -> Dataset:
    """Generate `class_counts[label]` phantoms per label, in label order.

    Sample `i` uses the phantom seed derived from (seed, i); its solid fraction
    is the class default plus a uniform jitter drawn from its own stream.
    """
    counts = {InvasivenessLabel.parse(k): int(v) for k, v in class_counts.items()}
    if any(v < 0 for v in counts.values()):
        raise VolumeError("class counts must be >= 0", details={"counts": {k.name: v for k, v in counts.items()}})
    if sum(counts.values()) < 1:
        raise VolumeError("class counts are all zero", code="empty_dataset")
    fractions = {**DEFAULT_CLASS_SOLID_FRACTION, **(class_solid_fraction or {})}

    samples: list[NoduleSample] = []
    index = 0
    for label in InvasivenessLabel:
        for _ in range(counts.get(label, 0)):
            jitter_rng = np.random.default_rng([seed, index, 1])
            jitter = float(jitter_rng.uniform(-solid_fraction_jitter, solid_fraction_jitter))
            spec = base_spec.model_copy(update={
                "label": label,
                "solid_fraction": float(np.clip(fractions[label] + jitter, 0.0, 1.0)),
                "seed": derive_seed(seed, index),
            })
            samples.append(generate_phantom(spec, sample_id=f"nodule-{index:04d}"))
            index += 1
    logger.info("generated %d phantoms (%s)", index, ", ".join(f"{k.name}={v}" for k, v in counts.items()))
    return Dataset(samples)


def generate_dataset_from_config(cfg: PhantomConfig) -> Dataset:
    fractions = {InvasivenessLabel[k]: v for k, v in cfg.class_solid_fraction.items()}
    return generate_dataset(
        cfg.class_counts,
        PhantomSpec.from_config(cfg),
        cfg.seed,
        class_solid_fraction=fractions,
        solid_fraction_jitter=cfg.solid_fraction_jitter,
    )
