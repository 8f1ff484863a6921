"""
Split, metrics and benchmark documents.
"""

from typing import Optional

from pydantic import BaseModel, ConfigDict


class SplitDoc(BaseModel):
    model_config = ConfigDict(extra="forbid")

    seed: int
    stratified: bool
    train_fraction: float
    train_ids: list[str]
    test_ids: list[str]


class MetricsReport(BaseModel):
    method: str
    seed: int
    accuracy: float
    confusion: list[list[int]]
    recall: list[float]
    precision: list[float]
    undefined_precision: list[bool]
    undefined_recall: list[bool] = []


class MethodSummary(BaseModel):
    method: str
    accuracy_mean: float
    accuracy_sd: float
    recall_mean: list[float]


class BenchReport(BaseModel):
    seeds: list[int]
    runs: list[MetricsReport]
    summary: list[MethodSummary]
    fusion_margin: Optional[float] = None
