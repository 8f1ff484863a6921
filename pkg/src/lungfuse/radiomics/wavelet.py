"""
Single-level orthonormal 3D Haar decomposition.

Low-pass (1/√2, 1/√2) and high-pass (1/√2, -1/√2) are applied separably along
x, y and z; band names list the filter per axis in that order (e.g. "HLL" is
high-pass along x). Odd extents are made even by replicating the last slice.
"""

import itertools
import logging

import numpy as np

from lungfuse.volume import Mask, Volume

logger = logging.getLogger(__name__)

BAND_NAMES: tuple[str, ...] = tuple("".join(p) for p in itertools.product("LH", repeat=3))
_SQRT1_2 = 1.0 / np.sqrt(2.0)


class WaveletBands:
    __slots__ = ("bands", "source_dims")

    def __init__(self, bands: dict[str, Volume], source_dims: tuple[int, int, int]):
        self.bands = bands
        self.source_dims = source_dims

    def __getitem__(self, name: str) -> Volume:
        return self.bands[name]

    def energy(self) -> float:
        return float(sum(np.sum(np.square(v.voxels, dtype=np.float64)) for v in self.bands.values()))


def pad_even(array: np.ndarray) -> np.ndarray:
    widths = [(0, n % 2) for n in array.shape]
    return np.pad(array, widths, mode="edge") if any(w for _, w in widths) else array


def _analyze(a: np.ndarray, axis: int) -> tuple[np.ndarray, np.ndarray]:
    even = np.take(a, np.arange(0, a.shape[axis], 2), axis=axis)
    odd = np.take(a, np.arange(1, a.shape[axis], 2), axis=axis)
    return (even + odd) * _SQRT1_2, (even - odd) * _SQRT1_2


def _synthesize(low: np.ndarray, high: np.ndarray, axis: int) -> np.ndarray:
    even = (low + high) * _SQRT1_2
    odd = (low - high) * _SQRT1_2
    shape = list(low.shape)
    shape[axis] *= 2
    out = np.empty(shape, dtype=np.float64)
    index: list = [slice(None)] * low.ndim
    index[axis] = slice(0, None, 2)
    out[tuple(index)] = even
    index[axis] = slice(1, None, 2)
    out[tuple(index)] = odd
    return out


def haar3d(vol: Volume) -> WaveletBands:
    bands: dict[str, np.ndarray] = {"": pad_even(vol.voxels.astype(np.float64))}
    for axis in range(3):
        split: dict[str, np.ndarray] = {}
        for name, data in bands.items():
            split[name + "L"], split[name + "H"] = _analyze(data, axis)
        bands = split
    spacing = tuple(2.0 * s for s in vol.spacing)
    return WaveletBands({name: Volume(bands[name], spacing) for name in BAND_NAMES}, vol.dims)


def haar3d_inverse(bands: WaveletBands) -> Volume:
    """Reconstruct the even-padded input volume."""
    data = {name: bands[name].voxels.astype(np.float64) for name in BAND_NAMES}
    for axis in (2, 1, 0):
        merged: dict[str, np.ndarray] = {}
        for name in {n[:axis] for n in data}:
            merged[name] = _synthesize(data[name + "L"], data[name + "H"], axis)
        data = merged
    spacing = tuple(s / 2.0 for s in bands[BAND_NAMES[0]].spacing)
    return Volume(data[""], spacing)


def downsample_mask(mask: Mask) -> Mask:
    """Strided majority vote over 2×2×2 blocks (at least 4 of 8 set).

    Falls back to "any voxel set" when the vote empties a non-empty mask.
    """
    padded = pad_even(mask.voxels.astype(np.int64))
    nx, ny, nz = (n // 2 for n in padded.shape)
    votes = padded.reshape(nx, 2, ny, 2, nz, 2).sum(axis=(1, 3, 5))
    down = votes >= 4
    if not down.any() and votes.any():
        logger.warning("majority downsampling emptied the mask; keeping any-voxel blocks")
        down = votes > 0
    return Mask(down)
