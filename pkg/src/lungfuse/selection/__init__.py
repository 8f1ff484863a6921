from lungfuse.selection.filters import (
    KBest,
    Standardizer,
    VarianceFilter,
    kbest_fit,
    standardize_apply,
    standardize_fit,
    variance_filter_fit,
)
from lungfuse.selection.lasso import (
    Lasso,
    lasso_fit,
    lasso_lambda_max,
    lasso_path,
    lasso_select_lambda,
    soft_threshold,
)
from lungfuse.selection.matrix import FeatureMatrix
from lungfuse.selection.pipeline import (
    SelectionPipeline,
    load_pipeline,
    pipeline_fit,
    pipeline_sha256,
    pipeline_transform,
    save_pipeline,
)

__all__ = [
    "FeatureMatrix",
    "KBest",
    "Lasso",
    "SelectionPipeline",
    "Standardizer",
    "VarianceFilter",
    "kbest_fit",
    "lasso_fit",
    "lasso_lambda_max",
    "lasso_path",
    "lasso_select_lambda",
    "load_pipeline",
    "pipeline_fit",
    "pipeline_sha256",
    "pipeline_transform",
    "save_pipeline",
    "soft_threshold",
    "standardize_apply",
    "standardize_fit",
    "variance_filter_fit",
]
