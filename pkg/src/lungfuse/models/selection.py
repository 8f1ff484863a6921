"""
Persisted form of a fitted selection pipeline.

Dumped in python mode and encoded with `json.dumps`, so infinite F-scores
survive as `Infinity`.
"""

from pydantic import BaseModel, ConfigDict, Field

PIPELINE_SCHEMA_VERSION = 1


class _Doc(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class VarianceFilterDoc(_Doc):
    threshold: float
    variances: list[float]
    kept: list[int]


class StandardizerDoc(_Doc):
    mean: list[float]
    std: list[float]


class KBestDoc(_Doc):
    k: int
    scores: list[float]
    kept: list[int]


class LassoDoc(_Doc):
    lam: float = Field(alias="lambda")
    coef: list[float]
    intercept: float
    kept: list[int]
    n_sweeps: int
    converged: bool


class PipelineDoc(_Doc):
    schema_version: int = PIPELINE_SCHEMA_VERSION
    input_names: list[str]
    variance: VarianceFilterDoc
    standardizer: StandardizerDoc
    kbest: KBestDoc
    lasso: LassoDoc
    output_indices: list[int]
    traces: dict[str, list[str]]
