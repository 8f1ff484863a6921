"""
Fixed-bin-width gray-level discretization of the masked region.
"""

import numpy as np

from lungfuse.errors import FeatureError
from lungfuse.volume import Mask, Volume


class DiscretizedVolume:
    """Gray levels 1..Ng under the mask, 0 elsewhere."""
    __slots__ = ("levels", "n_levels", "bin_width")

    def __init__(self, levels: np.ndarray, n_levels: int, bin_width: float):
        self.levels = levels
        self.n_levels = n_levels
        self.bin_width = bin_width

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.levels.shape  # type: ignore[return-value]

    @property
    def mask(self) -> np.ndarray:
        return self.levels > 0

    def __repr__(self) -> str:
        return f"DiscretizedVolume(dims={self.dims}, Ng={self.n_levels}, bin_width={self.bin_width})"


def discretize(vol: Volume, mask: Mask, bin_width: float) -> DiscretizedVolume:
    if bin_width <= 0:
        raise FeatureError("bin_width must be > 0", details={"bin_width": bin_width})
    if vol.dims != mask.dims:
        raise FeatureError("volume and mask dims differ")
    if not mask.voxels.any():
        raise FeatureError("mask has no foreground voxels", code="empty_mask")

    values = vol.voxels[mask.voxels].astype(np.float64)
    binned = np.floor((values - values.min()) / bin_width).astype(np.int64) + 1
    levels = np.zeros(vol.dims, dtype=np.int64)
    levels[mask.voxels] = binned
    return DiscretizedVolume(levels, int(binned.max()), float(bin_width))
