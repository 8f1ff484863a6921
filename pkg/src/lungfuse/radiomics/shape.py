"""
Shape descriptors from the mask alone.

The surface is a marching-cubes triangulation of the 0.5 level set of the
mask, optionally Gaussian-smoothed first to suppress voxel staircasing.
Sphericity and the compactness family use the mesh volume so that area and
volume come from the same surface.
"""

import logging
from collections.abc import Sequence

import numpy as np
from scipy import ndimage
from scipy.spatial import ConvexHull, QhullError
from scipy.spatial.distance import pdist
from skimage import measure

from lungfuse.errors import FeatureError
from lungfuse.radiomics.features import FeatureVector
from lungfuse.volume import Mask

logger = logging.getLogger(__name__)

SHAPE_NAMES = (
    "voxel_volume",
    "mesh_volume",
    "surface_area",
    "surface_volume_ratio",
    "sphericity",
    "compactness1",
    "compactness2",
    "spherical_disproportion",
    "max_3d_diameter",
    "major_axis_length",
    "minor_axis_length",
    "least_axis_length",
    "elongation",
    "flatness",
)
_HULL_THRESHOLD = 1000


def surface_mesh(mask: Mask, spacing: Sequence[float], smoothing_sigma: float = 0.75) -> tuple[np.ndarray, np.ndarray]:
    """Vertices (physical units) and triangle faces of the mask surface."""
    pad = 2 + int(np.ceil(3 * smoothing_sigma))
    field = np.pad(mask.voxels.astype(np.float64), pad)
    if smoothing_sigma > 0:
        smoothed = ndimage.gaussian_filter(field, smoothing_sigma)
        if smoothed.max() > 0.5:
            field = smoothed
        else:
            logger.debug("smoothing removed the 0.5 level set; meshing the raw mask")
    verts, faces, _, _ = measure.marching_cubes(field, level=0.5, spacing=tuple(float(s) for s in spacing))
    return verts, faces


def mesh_volume(verts: np.ndarray, faces: np.ndarray) -> float:
    """Enclosed volume by the divergence theorem over signed tetrahedra."""
    a, b, c = verts[faces[:, 0]], verts[faces[:, 1]], verts[faces[:, 2]]
    return float(abs(np.sum(np.einsum("ij,ij->i", a, np.cross(b, c))) / 6.0))


def principal_moments(mask: Mask, spacing: Sequence[float]) -> np.ndarray:
    """Eigenvalues λ1 ≥ λ2 ≥ λ3 of the population covariance of voxel coordinates."""
    coords = np.argwhere(mask.voxels).astype(np.float64) * np.asarray(spacing, dtype=np.float64)
    coords -= coords.mean(axis=0)
    cov = coords.T @ coords / coords.shape[0]
    eig = np.linalg.eigvalsh(cov)[::-1]
    return np.clip(eig, 0.0, None)


def max_diameter(mask: Mask, spacing: Sequence[float]) -> float:
    """Largest pairwise distance between surface voxels, in physical units."""
    surface = mask.voxels & ~ndimage.binary_erosion(mask.voxels, border_value=0)
    coords = np.argwhere(surface).astype(np.float64) * np.asarray(spacing, dtype=np.float64)
    if coords.shape[0] < 2:
        return 0.0
    if coords.shape[0] > _HULL_THRESHOLD:
        try:
            coords = coords[ConvexHull(coords).vertices]
        except QhullError:
            pass
    return float(pdist(coords).max())


def shape_features(mask: Mask, spacing: Sequence[float], smoothing_sigma: float = 0.75) -> FeatureVector:
    if not mask.voxels.any():
        raise FeatureError("mask has no foreground voxels", code="empty_mask")

    voxel_volume = mask.count * float(np.prod(spacing))
    verts, faces = surface_mesh(mask, spacing, smoothing_sigma)
    area = float(measure.mesh_surface_area(verts, faces))
    volume = mesh_volume(verts, faces)
    if area <= 0 or volume <= 0:
        raise FeatureError("degenerate surface mesh", details={"area": area, "volume": volume})

    l1, l2, l3 = principal_moments(mask, spacing)
    elongation = np.sqrt(l2 / l1) if l1 > 0 else 0.0
    flatness = np.sqrt(l3 / l1) if l1 > 0 else 0.0

    values = (
        voxel_volume,
        volume,
        area,
        area / volume,
        np.pi ** (1 / 3) * (6 * volume) ** (2 / 3) / area,
        volume / (np.sqrt(np.pi) * area**1.5),
        36 * np.pi * volume**2 / area**3,
        area / (36 * np.pi * volume**2) ** (1 / 3),
        max_diameter(mask, spacing),
        4 * np.sqrt(l1),
        4 * np.sqrt(l2),
        4 * np.sqrt(l3),
        elongation,
        flatness,
    )
    return FeatureVector(SHAPE_NAMES, values)
