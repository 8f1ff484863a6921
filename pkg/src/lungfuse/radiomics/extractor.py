"""
Full radiomics vector of one nodule sample.

Layout: shape (original mask only), then for the original volume and each
of the eight Haar bands: first-order, GLCM, GLRLM. Names follow
`<band>_<family>_<feature>` with band in {orig, LLL..HHH}.
"""

import logging

from lungfuse.config import RadiomicsConfig
from lungfuse.radiomics.discretize import discretize
from lungfuse.radiomics.features import FeatureVector
from lungfuse.radiomics.first_order import FIRST_ORDER_NAMES, first_order_features
from lungfuse.radiomics.glcm import GLCM_NAMES, glcm_features
from lungfuse.radiomics.glrlm import GLRLM_NAMES, glrlm_features
from lungfuse.radiomics.shape import SHAPE_NAMES, shape_features
from lungfuse.radiomics.wavelet import BAND_NAMES, downsample_mask, haar3d
from lungfuse.volume import Mask, NoduleSample, Volume

logger = logging.getLogger(__name__)

ORIGINAL_BAND = "orig"


def _texture_tag(family: str, bin_width: float, distance: int, cfg: RadiomicsConfig) -> str:
    tag = family
    if bin_width != cfg.bin_width:
        tag += f"_bw{bin_width:g}"
    if distance != 1:
        tag += f"_d{distance}"
    return tag


def band_features(vol: Volume, mask: Mask, cfg: RadiomicsConfig) -> FeatureVector:
    """First-order and texture families for one band, unprefixed by band."""
    parts: list[FeatureVector] = []
    if cfg.first_order:
        parts.append(first_order_features(vol, mask, cfg.bin_width).prefixed("firstorder"))
    if cfg.glcm or cfg.glrlm:
        for bw in [cfg.bin_width, *cfg.extra_bin_widths]:
            disc = discretize(vol, mask, bw)
            if cfg.glcm:
                for d in cfg.glcm_distances:
                    parts.append(glcm_features(disc, mask, d).prefixed(_texture_tag("glcm", bw, d, cfg)))
            if cfg.glrlm:
                parts.append(glrlm_features(disc, mask).prefixed(_texture_tag("glrlm", bw, 1, cfg)))
    return FeatureVector.concat(parts)


def extract_all(sample: NoduleSample, cfg: RadiomicsConfig) -> FeatureVector:
    sample.mask.require_foreground()
    parts: list[FeatureVector] = []
    if cfg.shape:
        shape = shape_features(sample.mask, sample.patch.spacing, cfg.mesh_smoothing_sigma)
        parts.append(shape.prefixed(f"{ORIGINAL_BAND}_shape"))
    parts.append(band_features(sample.patch, sample.mask, cfg).prefixed(ORIGINAL_BAND))
    if cfg.wavelet:
        bands = haar3d(sample.patch)
        band_mask = downsample_mask(sample.mask)
        for name in BAND_NAMES:
            parts.append(band_features(bands[name], band_mask, cfg).prefixed(name))
    vector = FeatureVector.concat(parts)
    logger.debug("extracted %d features for %s", len(vector), sample.id)
    return vector


def expected_feature_count(cfg: RadiomicsConfig) -> int:
    n_bw = 1 + len(cfg.extra_bin_widths)
    per_band = (
        len(FIRST_ORDER_NAMES) * cfg.first_order
        + len(GLCM_NAMES) * n_bw * len(cfg.glcm_distances) * cfg.glcm
        + len(GLRLM_NAMES) * n_bw * cfg.glrlm
    )
    n_bands = 1 + len(BAND_NAMES) * cfg.wavelet
    return len(SHAPE_NAMES) * cfg.shape + per_band * n_bands
