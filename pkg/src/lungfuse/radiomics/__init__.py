from lungfuse.radiomics.discretize import DiscretizedVolume, discretize
from lungfuse.radiomics.extractor import expected_feature_count, extract_all
from lungfuse.radiomics.features import FeatureVector
from lungfuse.radiomics.first_order import first_order_features
from lungfuse.radiomics.glcm import GLCMatrix, glcm_features, glcm_matrices
from lungfuse.radiomics.glrlm import GLRLMatrix, glrlm_features, glrlm_matrices
from lungfuse.radiomics.shape import shape_features
from lungfuse.radiomics.wavelet import WaveletBands, haar3d, haar3d_inverse

__all__ = [
    "DiscretizedVolume",
    "discretize",
    "expected_feature_count",
    "extract_all",
    "FeatureVector",
    "first_order_features",
    "GLCMatrix",
    "glcm_features",
    "glcm_matrices",
    "GLRLMatrix",
    "glrlm_features",
    "glrlm_matrices",
    "shape_features",
    "WaveletBands",
    "haar3d",
    "haar3d_inverse",
]
