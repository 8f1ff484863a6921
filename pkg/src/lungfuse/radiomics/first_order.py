"""
First-order (intensity) statistics of the masked region.

Variance is the population form; skewness is m3/m2^1.5 and kurtosis m4/m2²
(normal distribution => 3). Both are 0 for a constant region. Entropy and
uniformity are taken over the fixed-bin-width histogram.
"""

import numpy as np

from lungfuse.errors import FeatureError
from lungfuse.radiomics.discretize import discretize
from lungfuse.radiomics.features import FeatureVector
from lungfuse.volume import Mask, Volume

FIRST_ORDER_NAMES = (
    "mean",
    "median",
    "minimum",
    "maximum",
    "range",
    "variance",
    "standard_deviation",
    "skewness",
    "kurtosis",
    "energy",
    "root_mean_squared",
    "entropy",
    "uniformity",
    "mean_absolute_deviation",
    "robust_mean_absolute_deviation",
    "percentile10",
    "percentile90",
    "interquartile_range",
)


def first_order_features(vol: Volume, mask: Mask, bin_width: float) -> FeatureVector:
    if not mask.voxels.any():
        raise FeatureError("mask has no foreground voxels", code="empty_mask")
    x = vol.voxels[mask.voxels].astype(np.float64)

    mean = x.mean()
    dev = x - mean
    m2 = np.mean(dev**2)
    m3 = np.mean(dev**3)
    m4 = np.mean(dev**4)
    skewness = m3 / m2**1.5 if m2 > 0 else 0.0
    kurtosis = m4 / m2**2 if m2 > 0 else 0.0

    levels = discretize(vol, mask, bin_width).levels[mask.voxels]
    p = np.bincount(levels)[1:] / x.size
    p = p[p > 0]
    entropy = -np.sum(p * np.log2(p))
    uniformity = np.sum(p**2)

    p10, p25, p75, p90 = np.percentile(x, [10, 25, 75, 90])
    robust = x[(x >= p10) & (x <= p90)]
    robust_mad = np.mean(np.abs(robust - robust.mean()))

    values = (
        mean,
        np.median(x),
        x.min(),
        x.max(),
        x.max() - x.min(),
        m2,
        np.sqrt(m2),
        skewness,
        kurtosis,
        np.sum(x**2),
        np.sqrt(np.mean(x**2)),
        entropy,
        uniformity,
        np.mean(np.abs(dev)),
        robust_mad,
        p10,
        p90,
        p75 - p25,
    )
    return FeatureVector(FIRST_ORDER_NAMES, values)
