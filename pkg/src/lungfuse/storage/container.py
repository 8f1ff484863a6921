"""
Volume container — `<name>.json` header + `<name>.raw` little-endian float32 payload.
"""

import json
from pathlib import Path
from typing import Union

import numpy as np
from pydantic import ValidationError

from lungfuse.errors import ArtifactError, VolumeError
from lungfuse.models.volume import VolumeHeader
from lungfuse.volume import Mask, Volume

PathLike = Union[str, Path]
_DTYPE = np.dtype("<f4")


def _paths(path: PathLike) -> tuple[Path, Path]:
    base = Path(path)
    if base.suffix in (".json", ".raw"):
        base = base.with_suffix("")
    return base.with_name(base.name + ".json"), base.with_name(base.name + ".raw")


def _write(voxels: np.ndarray, spacing: tuple[float, float, float], kind: str, path: PathLike) -> Path:
    header_path, raw_path = _paths(path)
    header_path.parent.mkdir(parents=True, exist_ok=True)
    header = VolumeHeader(kind=kind, dims=voxels.shape, spacing=spacing)  # type: ignore[arg-type]
    header_path.write_text(json.dumps(header.model_dump(mode="json"), indent=2))
    raw_path.write_bytes(voxels.astype(_DTYPE).tobytes(order="F"))
    return header_path


def _read(path: PathLike) -> tuple[VolumeHeader, np.ndarray]:
    header_path, raw_path = _paths(path)
    if not header_path.exists() or not raw_path.exists():
        raise ArtifactError(f"volume container not found: {header_path.with_suffix('')}", code="missing_input")
    try:
        header = VolumeHeader.model_validate(json.loads(header_path.read_text()))
    except (json.JSONDecodeError, ValidationError) as e:
        raise VolumeError(f"invalid volume header {header_path}: {e}", code="invalid_header") from e
    if any(d < 1 for d in header.dims):
        raise VolumeError("header dims must be >= 1", code="invalid_header", details={"dims": list(header.dims)})

    payload = raw_path.read_bytes()
    expected = int(np.prod(header.dims)) * _DTYPE.itemsize
    if len(payload) != expected:
        raise VolumeError(
            "payload size does not match header dims",
            code="size_mismatch",
            details={"expected_bytes": expected, "actual_bytes": len(payload)},
        )
    voxels = np.frombuffer(payload, dtype=_DTYPE).reshape(header.dims, order="F").astype(np.float32)
    return header, voxels


def save_volume(vol: Volume, path: PathLike) -> Path:
    return _write(vol.voxels, vol.spacing, "volume", path)


def load_volume(path: PathLike) -> Volume:
    header, voxels = _read(path)
    return Volume(voxels, header.spacing)


def save_mask(mask: Mask, path: PathLike, spacing: tuple[float, float, float] = (1.0, 1.0, 1.0)) -> Path:
    return _write(mask.voxels.astype(np.float32), spacing, "mask", path)


def load_mask(path: PathLike) -> Mask:
    header, voxels = _read(path)
    if header.kind != "mask":
        raise VolumeError("container is not a mask", code="invalid_header", details={"kind": header.kind})
    return Mask(voxels)
