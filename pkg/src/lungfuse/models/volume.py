"""
On-disk volume container header and dataset manifest entries.
"""

from typing import Literal

from pydantic import BaseModel, ConfigDict


class VolumeHeader(BaseModel):
    """`<name>.json` next to a `<name>.raw` payload."""
    model_config = ConfigDict(extra="forbid")

    kind: Literal["volume", "mask"] = "volume"
    dims: tuple[int, int, int]
    spacing: tuple[float, float, float]
    dtype: Literal["float32"] = "float32"
    byte_order: Literal["little"] = "little"


class ManifestEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str
    label: int
    volume_path: str
    mask_path: str
