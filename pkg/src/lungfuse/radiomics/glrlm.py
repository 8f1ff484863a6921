"""
Gray-level run-length matrices over the 13 directions.

A run is a maximal sequence of masked voxels with equal level along a
direction; every masked voxel belongs to exactly one run per direction.
"""

from typing import Optional

import numpy as np

from lungfuse.radiomics.directions import DIRECTIONS_13, paired_views
from lungfuse.radiomics.discretize import DiscretizedVolume
from lungfuse.radiomics.features import FeatureVector
from lungfuse.radiomics.glcm import masked_levels
from lungfuse.volume import Mask

GLRLM_NAMES = (
    "short_run_emphasis",
    "long_run_emphasis",
    "gray_level_non_uniformity",
    "run_length_non_uniformity",
    "run_percentage",
    "low_gray_level_run_emphasis",
    "high_gray_level_run_emphasis",
)


class GLRLMatrix:
    """Run counts M[level-1, length-1] for one direction."""
    __slots__ = ("matrix", "direction")

    def __init__(self, matrix: np.ndarray, direction: tuple[int, int, int]):
        self.matrix = matrix
        self.direction = direction

    @property
    def max_run_length(self) -> int:
        return self.matrix.shape[1]

    def coverage(self) -> float:
        """Σ j·M[i, j] — the number of voxels the runs cover."""
        lengths = np.arange(1, self.matrix.shape[1] + 1, dtype=np.float64)
        return float(np.sum(self.matrix * lengths[None, :]))


def glrlm_matrix(levels: np.ndarray, n_levels: int, direction: tuple[int, int, int]) -> GLRLMatrix:
    step = np.array(direction)

    # continues[p]: the voxel after p along `direction` extends p's run
    continues = np.zeros(levels.shape, dtype=bool)
    a, b = paired_views(levels, direction)
    cont_view, _ = paired_views(continues, direction)
    cont_view[...] = (a > 0) & (a == b)

    # p starts a run unless the voxel before it continues into p
    starts = levels > 0
    _, start_view = paired_views(starts, direction)
    start_view &= ~cont_view

    pos = np.argwhere(starts)
    run_levels = levels[tuple(pos.T)]
    lengths = np.ones(len(pos), dtype=np.int64)
    active = np.ones(len(pos), dtype=bool)
    cur = pos.copy()
    while active.any():
        idx = np.flatnonzero(active)
        ext = continues[tuple(cur[idx].T)]
        active[idx[~ext]] = False
        grow = idx[ext]
        lengths[grow] += 1
        cur[grow] += step

    max_len = int(lengths.max()) if len(lengths) else 1
    codes = (run_levels - 1) * max_len + (lengths - 1)
    matrix = np.bincount(codes, minlength=n_levels * max_len).reshape(n_levels, max_len).astype(np.float64)
    return GLRLMatrix(matrix, direction)


def glrlm_matrices(disc: DiscretizedVolume, mask: Optional[Mask] = None) -> list[GLRLMatrix]:
    levels = masked_levels(disc, mask)
    return [glrlm_matrix(levels, disc.n_levels, d) for d in DIRECTIONS_13]


def matrix_features(m: np.ndarray, n_voxels: int) -> np.ndarray:
    """The seven run-length features of one matrix, in GLRLM_NAMES order."""
    n_runs = m.sum()
    lv = np.arange(1, m.shape[0] + 1, dtype=np.float64)[:, None]
    ln = np.arange(1, m.shape[1] + 1, dtype=np.float64)[None, :]
    return np.array([
        np.sum(m / ln**2) / n_runs,
        np.sum(m * ln**2) / n_runs,
        np.sum(m.sum(axis=1) ** 2) / n_runs,
        np.sum(m.sum(axis=0) ** 2) / n_runs,
        n_runs / n_voxels,
        np.sum(m / lv**2) / n_runs,
        np.sum(m * lv**2) / n_runs,
    ])


def glrlm_features(disc: DiscretizedVolume, mask: Optional[Mask] = None) -> FeatureVector:
    levels = masked_levels(disc, mask)
    n_voxels = int((levels > 0).sum())
    per_direction = np.stack([
        matrix_features(glrlm_matrix(levels, disc.n_levels, d).matrix, n_voxels) for d in DIRECTIONS_13
    ])
    return FeatureVector(GLRLM_NAMES, per_direction.mean(axis=0))
