"""
Gray-level co-occurrence matrices over the 13 directions and their
direction-averaged features.
"""

from typing import Optional

import numpy as np

from lungfuse.errors import FeatureError
from lungfuse.radiomics.directions import DIRECTIONS_13, paired_views
from lungfuse.radiomics.discretize import DiscretizedVolume
from lungfuse.radiomics.features import FeatureVector
from lungfuse.volume import Mask

GLCM_NAMES = (
    "contrast",
    "dissimilarity",
    "homogeneity",
    "energy",
    "entropy",
    "correlation",
    "cluster_shade",
    "cluster_prominence",
    "max_probability",
)


class GLCMatrix:
    __slots__ = ("matrix", "offset")

    def __init__(self, matrix: np.ndarray, offset: tuple[int, int, int]):
        self.matrix = matrix
        self.offset = offset

    @property
    def total(self) -> float:
        return float(self.matrix.sum())

    def normalized(self) -> np.ndarray:
        return self.matrix / self.matrix.sum()


def masked_levels(disc: DiscretizedVolume, mask: Optional[Mask]) -> np.ndarray:
    levels = disc.levels
    if mask is not None:
        if mask.dims != disc.dims:
            raise FeatureError("mask and discretized volume dims differ")
        levels = np.where(mask.voxels, levels, 0)
    if not (levels > 0).any():
        raise FeatureError("mask has no foreground voxels", code="empty_mask")
    return levels


def glcm_matrix(levels: np.ndarray, n_levels: int, offset: tuple[int, int, int]) -> GLCMatrix:
    """Symmetric co-occurrence counts for `offset` (pairs p, p+offset both masked)."""
    a, b = paired_views(levels, offset)
    valid = (a > 0) & (b > 0)
    codes = (a[valid] - 1) * n_levels + (b[valid] - 1)
    counts = np.bincount(codes, minlength=n_levels * n_levels).reshape(n_levels, n_levels).astype(np.float64)
    return GLCMatrix(counts + counts.T, offset)


def glcm_matrices(disc: DiscretizedVolume, mask: Optional[Mask] = None, distance: int = 1) -> list[GLCMatrix]:
    levels = masked_levels(disc, mask)
    return [
        glcm_matrix(levels, disc.n_levels, (d[0] * distance, d[1] * distance, d[2] * distance))
        for d in DIRECTIONS_13
    ]


def matrix_features(p: np.ndarray) -> np.ndarray:
    """The nine features of one normalized matrix, in GLCM_NAMES order."""
    ng = p.shape[0]
    i, j = np.meshgrid(np.arange(1, ng + 1, dtype=np.float64), np.arange(1, ng + 1, dtype=np.float64), indexing="ij")
    diff = i - j
    px = p.sum(axis=1)
    py = p.sum(axis=0)
    lv = np.arange(1, ng + 1, dtype=np.float64)
    mu_x, mu_y = np.sum(lv * px), np.sum(lv * py)
    sd_x = np.sqrt(np.sum((lv - mu_x) ** 2 * px))
    sd_y = np.sqrt(np.sum((lv - mu_y) ** 2 * py))
    nz = p[p > 0]
    cluster = i + j - mu_x - mu_y

    if sd_x > 0 and sd_y > 0:
        correlation = (np.sum(i * j * p) - mu_x * mu_y) / (sd_x * sd_y)
    else:
        correlation = 0.0

    return np.array([
        np.sum(diff**2 * p),
        np.sum(np.abs(diff) * p),
        np.sum(p / (1.0 + diff**2)),
        np.sum(p**2),
        -np.sum(nz * np.log2(nz)),
        correlation,
        np.sum(cluster**3 * p),
        np.sum(cluster**4 * p),
        p.max(),
    ])


def glcm_features(disc: DiscretizedVolume, mask: Optional[Mask] = None, distance: int = 1) -> FeatureVector:
    """Features averaged over the directions that have at least one pair.

    A region with no neighbouring pairs at all is treated as a single-cell
    matrix (the constant-region values).
    """
    if disc.n_levels < 1:
        raise FeatureError("discretized volume has no gray levels")
    mats = [m for m in glcm_matrices(disc, mask, distance) if m.total > 0]
    if not mats:
        return FeatureVector(GLCM_NAMES, matrix_features(np.ones((1, 1))))
    per_direction = np.stack([matrix_features(m.normalized()) for m in mats])
    return FeatureVector(GLCM_NAMES, per_direction.mean(axis=0))
