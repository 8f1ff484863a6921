"""
Volume and mask containers, nodule samples, datasets and patch extraction.

Arrays are indexed [x, y, z]; on disk the linear order is x-fastest
(Fortran order). All containers are read-only after construction.
"""

from collections import Counter
from typing import Iterator, Sequence

import numpy as np

from lungfuse.errors import VolumeError
from lungfuse.models.labels import InvasivenessLabel
from lungfuse.models.volume import ManifestEntry

AIR_HU = -1024.0


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.flags.writeable = False
    return array


class Volume:
    """3D scalar grid with physical spacing in mm."""
    __slots__ = ("voxels", "spacing")

    def __init__(self, voxels: np.ndarray, spacing: Sequence[float] = (1.0, 1.0, 1.0)):
        voxels = np.asarray(voxels)
        if voxels.ndim != 3 or min(voxels.shape) < 1:
            raise VolumeError("volume must be a 3D array with all dims >= 1", details={"shape": list(voxels.shape)})
        if not np.issubdtype(voxels.dtype, np.floating):
            voxels = voxels.astype(np.float64)
        if not np.all(np.isfinite(voxels)):
            raise VolumeError("volume contains non-finite values", code="non_finite")
        spacing = tuple(float(s) for s in spacing)
        if len(spacing) != 3 or any(s <= 0 for s in spacing):
            raise VolumeError("spacing must be three positive values", details={"spacing": list(spacing)})
        self.voxels = _frozen(voxels)
        self.spacing: tuple[float, float, float] = spacing  # type: ignore[assignment]

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.voxels.shape  # type: ignore[return-value]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Volume):
            return NotImplemented
        return (self.spacing == other.spacing and self.voxels.dtype == other.voxels.dtype
                and np.array_equal(self.voxels, other.voxels))

    def __repr__(self) -> str:
        return f"Volume(dims={self.dims}, spacing={self.spacing}, dtype={self.voxels.dtype})"


class Mask:
    """Binary region of interest paired with a Volume of the same dims."""
    __slots__ = ("voxels",)

    def __init__(self, voxels: np.ndarray):
        voxels = np.asarray(voxels)
        if voxels.ndim != 3 or min(voxels.shape) < 1:
            raise VolumeError("mask must be a 3D array with all dims >= 1", details={"shape": list(voxels.shape)})
        if voxels.dtype != np.bool_:
            if not np.all((voxels == 0) | (voxels == 1)):
                raise VolumeError("mask values must be 0 or 1", code="non_binary_mask")
            voxels = voxels.astype(bool)
        self.voxels = _frozen(voxels)

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.voxels.shape  # type: ignore[return-value]

    @property
    def count(self) -> int:
        return int(self.voxels.sum())

    def require_foreground(self) -> None:
        if not self.voxels.any():
            raise VolumeError("mask has no foreground voxels", code="empty_mask")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Mask):
            return NotImplemented
        return np.array_equal(self.voxels, other.voxels)

    def __repr__(self) -> str:
        return f"Mask(dims={self.dims}, count={self.count})"


class NoduleSample:
    __slots__ = ("id", "patch", "mask", "label")

    def __init__(self, id: str, patch: Volume, mask: Mask, label: "InvasivenessLabel | int"):
        if patch.dims != mask.dims:
            raise VolumeError("patch and mask dims differ", details={"patch": list(patch.dims), "mask": list(mask.dims)})
        self.id = id
        self.patch = patch
        self.mask = mask
        self.label = InvasivenessLabel(int(label))

    def __repr__(self) -> str:
        return f"NoduleSample(id={self.id!r}, label={self.label.name}, dims={self.patch.dims})"


class Dataset:
    """Non-empty list of samples with unique ids."""
    __slots__ = ("samples",)

    def __init__(self, samples: Sequence[NoduleSample]):
        samples = list(samples)
        if not samples:
            raise VolumeError("dataset is empty", code="empty_dataset")
        dupes = [i for i, n in Counter(s.id for s in samples).items() if n > 1]
        if dupes:
            raise VolumeError("duplicate sample ids", details={"ids": dupes[:10]})
        self.samples: list[NoduleSample] = samples

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self) -> Iterator[NoduleSample]:
        return iter(self.samples)

    @property
    def ids(self) -> list[str]:
        return [s.id for s in self.samples]

    @property
    def labels(self) -> np.ndarray:
        return np.array([int(s.label) for s in self.samples], dtype=np.int64)

    def by_id(self) -> dict[str, NoduleSample]:
        return {s.id: s for s in self.samples}

    def histogram(self) -> dict[InvasivenessLabel, int]:
        counts = Counter(s.label for s in self.samples)
        return {label: counts.get(label, 0) for label in InvasivenessLabel}

    def subset(self, ids: Sequence[str]) -> "Dataset":
        index = self.by_id()
        missing = [i for i in ids if i not in index]
        if missing:
            raise VolumeError("ids not in dataset", details={"ids": missing[:10]})
        return Dataset([index[i] for i in ids])

    def manifest(self) -> list[ManifestEntry]:
        return [
            ManifestEntry(id=s.id, label=int(s.label),
                          volume_path=f"volumes/{s.id}", mask_path=f"masks/{s.id}")
            for s in self.samples
        ]


def extract_patch(
    vol: Volume,
    center: Sequence[int],
    size: Sequence[int],
    fill: float = AIR_HU,
) -> Volume:
    """Crop a `size`-shaped block centered at `center`; out-of-bounds voxels take `fill`.

    The block spans [c - s//2, c - s//2 + s) along each axis.
    """
    size = tuple(int(s) for s in size)
    center = tuple(int(c) for c in center)
    if len(size) != 3 or any(s < 1 for s in size):
        raise VolumeError("patch size components must be >= 1", details={"size": list(size)})
    if len(center) != 3:
        raise VolumeError("center must be a voxel index triple")

    out = np.full(size, fill, dtype=vol.voxels.dtype)
    src: list[slice] = []
    dst: list[slice] = []
    for c, s, n in zip(center, size, vol.dims):
        start = c - s // 2
        lo, hi = max(start, 0), min(start + s, n)
        if lo >= hi:
            return Volume(out, vol.spacing)
        src.append(slice(lo, hi))
        dst.append(slice(lo - start, hi - start))
    out[tuple(dst)] = vol.voxels[tuple(src)]
    return Volume(out, vol.spacing)


def extract_mask_patch(mask: Mask, center: Sequence[int], size: Sequence[int]) -> Mask:
    """Mask counterpart of `extract_patch`; out-of-bounds voxels are background."""
    as_volume = Volume(mask.voxels.astype(np.float32))
    return Mask(extract_patch(as_volume, center, size, fill=0.0).voxels > 0.5)
