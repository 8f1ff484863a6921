"""
Selection pipeline: variance filter → standardization → K-best → Lasso.

`pipeline_fit` only ever sees training rows. `pipeline_transform` replays the
kept-index slices and the training standardization, and emits the
standardized values of the finally kept columns (the RF vector).
"""

import hashlib
import json
import logging
from pathlib import Path
from typing import Union

import numpy as np
from pydantic import ValidationError

from lungfuse.config import SelectionConfig
from lungfuse.errors import ArtifactError, SelectionError
from lungfuse.models.selection import PipelineDoc
from lungfuse.selection.filters import (
    KBest,
    Standardizer,
    VarianceFilter,
    kbest_fit,
    standardize_fit,
    variance_filter_fit,
)
from lungfuse.selection.lasso import Lasso, lasso_fit, lasso_select_lambda
from lungfuse.selection.matrix import FeatureMatrix

logger = logging.getLogger(__name__)

class SelectionPipeline:
    __slots__ = ("input_names", "variance", "standardizer", "kbest", "lasso", "output_indices")

    def __init__(
        self,
        input_names: list[str],
        variance: VarianceFilter,
        standardizer: Standardizer,
        kbest: KBest,
        lasso: Lasso,
        output_indices: np.ndarray,
    ):
        self.input_names = input_names
        self.variance = variance
        self.standardizer = standardizer
        self.kbest = kbest
        self.lasso = lasso
        self.output_indices = output_indices

    def traces(self) -> dict[str, list[str]]:
        """Feature names surviving each stage."""
        after_variance = [self.input_names[i] for i in self.variance.kept]
        after_kbest = [after_variance[i] for i in self.kbest.kept]
        return {
            "input": list(self.input_names),
            "variance": after_variance,
            "kbest": after_kbest,
            "lasso": [after_kbest[i] for i in self.lasso.kept],
            "output": [after_kbest[i] for i in self.output_indices],
        }

    @property
    def output_names(self) -> list[str]:
        return self.traces()["output"]

    @property
    def width(self) -> int:
        return int(self.output_indices.size)

    def to_doc(self) -> PipelineDoc:
        return PipelineDoc(
            input_names=list(self.input_names),
            variance=self.variance.to_doc(),
            standardizer=self.standardizer.to_doc(),
            kbest=self.kbest.to_doc(),
            lasso=self.lasso.to_doc(),
            output_indices=self.output_indices.tolist(),
            traces=self.traces(),
        )

    @classmethod
    def from_doc(cls, doc: PipelineDoc) -> "SelectionPipeline":
        return cls(
            list(doc.input_names),
            VarianceFilter.from_doc(doc.variance),
            Standardizer.from_doc(doc.standardizer),
            KBest.from_doc(doc.kbest),
            Lasso.from_doc(doc.lasso),
            np.array(doc.output_indices, dtype=np.int64),
        )


def _final_indices(lasso: Lasso, kbest: KBest, cfg: SelectionConfig) -> np.ndarray:
    kept = lasso.kept
    if cfg.max_features is not None and kept.size > cfg.max_features:
        order = np.lexsort((kept, -np.abs(lasso.coef[kept])))
        kept = np.sort(kept[order[: cfg.max_features]])
    if kept.size < cfg.min_features:
        position = np.empty(kbest.scores.size, dtype=np.int64)
        position[kbest.ranking()] = np.arange(kbest.scores.size)
        taken = set(kept.tolist())
        fill = [i for i in np.argsort(position[kbest.kept]) if i not in taken]
        needed = min(cfg.min_features, kbest.kept.size) - kept.size
        logger.warning("lasso kept %d features; padding with %d top K-best features", kept.size, needed)
        kept = np.sort(np.concatenate([kept, np.array(fill[:needed], dtype=np.int64)]))
    return kept.astype(np.int64)


def pipeline_fit(x_train: FeatureMatrix, cfg: SelectionConfig, workers: int = 1) -> SelectionPipeline:
    """Fit all stages on the training matrix; its labels are the ordinal Lasso target.

    `workers` > 1 runs the CV folds in separate processes with the same result.
    """
    y = x_train.labels
    variance = variance_filter_fit(x_train, cfg.variance_threshold)
    if variance.kept.size == 0:
        raise SelectionError(
            "no feature passes the variance filter",
            code="empty_selection",
            details={"threshold": cfg.variance_threshold},
        )
    stage = variance.transform(x_train.values)
    standardizer = standardize_fit(stage)
    stage = standardizer.transform(stage)
    kbest = kbest_fit(stage, y, cfg.k)
    stage = kbest.transform(stage)
    target = y.astype(np.float64)
    if cfg.fixed_lambda is not None:
        lam = cfg.fixed_lambda
    else:
        lam = lasso_select_lambda(
            stage,
            target,
            folds=cfg.folds,
            seed=cfg.seed,
            grid_size=cfg.lambda_grid_size,
            min_ratio=cfg.lambda_min_ratio,
            tol=cfg.tol,
            max_sweeps=cfg.max_sweeps,
            workers=workers,
        )
    lasso = lasso_fit(stage, target, lam, cfg.tol, cfg.max_sweeps)
    pipeline = SelectionPipeline(list(x_train.names), variance, standardizer, kbest, lasso, np.empty(0, np.int64))
    pipeline.output_indices = _final_indices(lasso, kbest, cfg)
    logger.info(
        "selection: %d → %d (variance) → %d (k-best) → %d (lasso λ=%.4g)",
        len(x_train.names), variance.kept.size, kbest.kept.size, pipeline.width, lam,
    )
    return pipeline


def pipeline_transform(pipeline: SelectionPipeline, x: FeatureMatrix) -> FeatureMatrix:
    if x.names != pipeline.input_names:
        raise SelectionError(
            "feature names differ from the fitted pipeline",
            code="feature_mismatch",
            details={"expected": len(pipeline.input_names), "got": len(x.names)},
        )
    stage = pipeline.variance.transform(x.values)
    stage = pipeline.standardizer.transform(stage)
    stage = pipeline.kbest.transform(stage)
    return x.with_values(stage[:, pipeline.output_indices], pipeline.output_names)


# ── Persistence ──


def pipeline_bytes(pipeline: SelectionPipeline) -> bytes:
    return json.dumps(pipeline.to_doc().model_dump(by_alias=True), indent=2).encode()


def pipeline_sha256(pipeline: SelectionPipeline) -> str:
    return hashlib.sha256(pipeline_bytes(pipeline)).hexdigest()


def save_pipeline(pipeline: SelectionPipeline, path: Union[str, Path]) -> str:
    """Writes the pipeline document; returns its hash."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = pipeline_bytes(pipeline)
    path.write_bytes(data)
    return hashlib.sha256(data).hexdigest()


def load_pipeline(path: Union[str, Path]) -> tuple[SelectionPipeline, str]:
    """Reads a pipeline document; returns it with the hash of the bytes on disk."""
    path = Path(path)
    if not path.exists():
        raise ArtifactError(f"selection pipeline not found: {path}", code="missing_input")
    data = path.read_bytes()
    try:
        doc = PipelineDoc.model_validate(json.loads(data))
    except (json.JSONDecodeError, ValidationError) as e:
        raise ArtifactError(f"invalid selection pipeline {path}: {e}", code="invalid_pipeline") from e
    return SelectionPipeline.from_doc(doc), hashlib.sha256(data).hexdigest()
