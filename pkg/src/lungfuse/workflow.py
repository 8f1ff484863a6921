"""
File-to-file pipeline stages shared by the CLI commands and the benchmark.

Every stage reads its inputs from disk artifacts (or in-memory equivalents)
and writes its primary outputs deterministically.
"""

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional, Union

import numpy as np
from pydantic import BaseModel, ValidationError

from lungfuse.config import RunConfig
from lungfuse.errors import ArtifactError, ModelError
from lungfuse.evaluation import confusion, make_split, summarize, summarize_runs
from lungfuse.fusion.ensemble import combine_probabilities
from lungfuse.fusion.models import Batch, CNNModel, FusionModel
from lungfuse.fusion.svm import LinearSVM, train_svm
from lungfuse.fusion.trainer import train_cnn_baseline, train_fusion, validation_split
from lungfuse.models.evaluation import BenchReport, MetricsReport, SplitDoc
from lungfuse.phantom import generate_dataset_from_config
from lungfuse.radiomics.extractor import extract_all
from lungfuse.radiomics.features import FeatureVector
from lungfuse.selection.matrix import FeatureMatrix
from lungfuse.selection.pipeline import (
    SelectionPipeline,
    pipeline_fit,
    pipeline_sha256,
    pipeline_transform,
    save_pipeline,
)
from lungfuse.storage.checkpoint import load_model, save_link, save_model, save_training_log, verify_link
from lungfuse.storage.dataset import save_dataset
from lungfuse.storage.tables import save_matrix
from lungfuse.volume import Dataset, NoduleSample

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
MODEL_KINDS = ("fusion", "cnn", "svm")
COMBINED_METHOD = "svm+cnn"

FEATURES_CSV = "features.csv"
SPLIT_JSON = "split.json"
PIPELINE_JSON = "pipeline.json"
RF_TRAIN_CSV = "rf_train.csv"
RF_TEST_CSV = "rf_test.csv"
METRICS_JSON = "metrics.json"


def write_doc(doc: BaseModel, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc.model_dump(mode="json"), indent=2))
    return path


def read_doc(doc_type: type[BaseModel], path: PathLike):
    path = Path(path)
    if not path.exists():
        raise ArtifactError(f"{path.name} not found: {path}", code="missing_input")
    try:
        return doc_type.model_validate(json.loads(path.read_text()))
    except (json.JSONDecodeError, ValidationError) as e:
        raise ArtifactError(f"invalid {path.name}: {e}", code="invalid_document") from e


# ── Data ──


def generate(cfg: RunConfig, out_dir: PathLike) -> Dataset:
    dataset = generate_dataset_from_config(cfg.phantom)
    save_dataset(dataset, out_dir)
    return dataset


def _extract_one(args: tuple[NoduleSample, RunConfig]) -> FeatureVector:
    sample, cfg = args
    return extract_all(sample, cfg.radiomics)


def extract(dataset: Dataset, cfg: RunConfig, out_csv: Optional[PathLike] = None, workers: int = 1) -> FeatureMatrix:
    """Radiomics for every sample, in dataset order regardless of `workers`."""
    jobs = [(s, cfg) for s in dataset]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            vectors = list(pool.map(_extract_one, jobs, chunksize=4))
    else:
        vectors = [_extract_one(j) for j in jobs]
    matrix = FeatureMatrix.from_vectors(dataset.ids, dataset.labels, vectors)
    logger.info("extracted %d × %d feature matrix", *matrix.shape)
    if out_csv is not None:
        save_matrix(matrix, out_csv)
    return matrix


def split(dataset: Dataset, cfg: RunConfig, seed: int, out: Optional[PathLike] = None) -> SplitDoc:
    doc = make_split(dataset, cfg.eval.train_fraction, seed, cfg.eval.stratified)
    if out is not None:
        write_doc(doc, out)
    return doc


def select(
    features: FeatureMatrix,
    split_doc: SplitDoc,
    cfg: RunConfig,
    out_dir: Optional[PathLike] = None,
    workers: int = 1,
) -> tuple[SelectionPipeline, str, FeatureMatrix, FeatureMatrix]:
    """Fit on the training rows only; returns (pipeline, hash, rf_train, rf_test)."""
    train = features.rows(split_doc.train_ids)
    test = features.rows(split_doc.test_ids)
    pipeline = pipeline_fit(train, cfg.selection, workers)
    rf_train = pipeline_transform(pipeline, train)
    rf_test = pipeline_transform(pipeline, test)
    if out_dir is not None:
        out = Path(out_dir)
        digest = save_pipeline(pipeline, out / PIPELINE_JSON)
        save_matrix(rf_train, out / RF_TRAIN_CSV)
        save_matrix(rf_test, out / RF_TEST_CSV)
    else:
        digest = pipeline_sha256(pipeline)
    return pipeline, digest, rf_train, rf_test


# ── Models ──


def build_batch(dataset: Dataset, ids: list[str], rf: Optional[FeatureMatrix] = None) -> Batch:
    index = dataset.by_id()
    missing = [i for i in ids if i not in index]
    if missing:
        raise ArtifactError("split ids are missing from the dataset", code="missing_input", details={"ids": missing[:10]})
    samples = [index[i] for i in ids]
    patches = np.stack([s.patch.voxels for s in samples]).astype(np.float64)
    labels = np.array([int(s.label) for s in samples], dtype=np.int64)
    return Batch(patches, labels, None if rf is None else rf.rows(ids).values)


def train(
    kind: str,
    dataset: Dataset,
    split_doc: SplitDoc,
    cfg: RunConfig,
    out: PathLike,
    rf_train: Optional[FeatureMatrix] = None,
    pipeline_hash: Optional[str] = None,
) -> Union[FusionModel, CNNModel, LinearSVM]:
    """Train one model kind and write `<out>.json/.raw` (+ `.link.json`, `.log.json`)."""
    if kind not in MODEL_KINDS:
        raise ModelError(f"unknown model kind {kind!r}", code="unknown_model", details={"kinds": list(MODEL_KINDS)})
    if kind in ("fusion", "svm") and (rf_train is None or pipeline_hash is None):
        raise ArtifactError(f"{kind} needs the selected radiomics table and its pipeline", code="missing_input")
    seed = cfg.trainer.seed
    ids = list(split_doc.train_ids)
    if kind == "svm":
        rows = rf_train.rows(ids)  # type: ignore[union-attr]
        model = train_svm(rows.values, rows.labels, cfg.model.svm_c, cfg.model.svm_epochs, cfg.model.svm_learning_rate)
        save_model(model, out, cfg.model, seed=seed)
        save_link(out, pipeline_hash, model.rf_width)  # type: ignore[arg-type]
        return model

    fit_idx, val_idx = validation_split(len(ids), cfg.trainer.val_fraction, seed)
    full = build_batch(dataset, ids, rf_train if kind == "fusion" else None)
    fit = train_fusion if kind == "fusion" else train_cnn_baseline
    model, log = fit(full.take(fit_idx), full.take(val_idx), cfg.model, cfg.trainer)
    save_model(model, out, cfg.model, seed=seed, epoch=log.best_epoch)
    save_training_log(log, out)
    if kind == "fusion":
        save_link(out, pipeline_hash, model.rf_width)  # type: ignore[arg-type, union-attr]
    return model


def _probabilities(
    checkpoint: PathLike,
    dataset: Dataset,
    ids: list[str],
    rf_test: Optional[FeatureMatrix],
    pipeline_hash: Optional[str],
) -> tuple[np.ndarray, str]:
    model, header = load_model(checkpoint)
    if header.kind in ("fusion", "svm"):
        if rf_test is None or pipeline_hash is None:
            raise ArtifactError(f"{header.kind} evaluation needs the radiomics table and pipeline", code="missing_input")
        verify_link(checkpoint, pipeline_hash, rf_test.shape[1])
    if isinstance(model, LinearSVM):
        return model.predict_proba(rf_test.rows(ids).values), header.kind  # type: ignore[union-attr]
    return model.predict_proba(build_batch(dataset, ids, rf_test if header.kind == "fusion" else None)), header.kind


def evaluate(
    checkpoints: list[PathLike],
    dataset: Dataset,
    split_doc: SplitDoc,
    seed: int,
    out: Optional[PathLike] = None,
    rf_test: Optional[FeatureMatrix] = None,
    pipeline_hash: Optional[str] = None,
    method: Optional[str] = None,
) -> MetricsReport:
    """One checkpoint, or an svm checkpoint then a cnn checkpoint whose probabilities are averaged."""
    if len(checkpoints) not in (1, 2):
        raise ArtifactError("evaluate takes one checkpoint or an svm/cnn pair", code="invalid_arguments")
    ids = list(split_doc.test_ids)
    outputs = [_probabilities(c, dataset, ids, rf_test, pipeline_hash) for c in checkpoints]
    probs = [p for p, _ in outputs]
    if len(probs) == 2:
        kinds = [kind for _, kind in outputs]
        if kinds != ["svm", "cnn"]:
            raise ArtifactError(
                "combining needs an svm checkpoint followed by a cnn checkpoint",
                code="invalid_arguments",
                details={"kinds": kinds},
            )
        p = combine_probabilities(probs[0], probs[1])
    else:
        p = probs[0]
    labels = build_batch(dataset, ids).labels
    cm = confusion(np.argmax(p, axis=1), labels)
    report = summarize(cm, method or (COMBINED_METHOD if len(probs) == 2 else outputs[0][1]), seed)
    if out is not None:
        write_doc(report, out)
    return report


# ── Benchmark ──

BENCH_METHODS = ("svm", "cnn", COMBINED_METHOD, "fusion")


def run_seed(cfg: RunConfig, seed: int, out_dir: PathLike, workers: int = 1) -> list[MetricsReport]:
    """Every stage for one seed under `out_dir`; returns metrics in BENCH_METHODS order."""
    cfg = cfg.with_seed(seed)
    out = Path(out_dir)
    dataset = generate(cfg, out / "dataset")
    features = extract(dataset, cfg, out / FEATURES_CSV, workers)
    split_doc = split(dataset, cfg, seed, out / SPLIT_JSON)
    _, digest, rf_train, rf_test = select(features, split_doc, cfg, out, workers)
    models = out / "models"
    for kind in ("svm", "cnn", "fusion"):
        train(kind, dataset, split_doc, cfg, models / kind, rf_train, digest)
    checkpoints = {
        "svm": [models / "svm"],
        "cnn": [models / "cnn"],
        COMBINED_METHOD: [models / "svm", models / "cnn"],
        "fusion": [models / "fusion"],
    }
    reports = []
    for method in BENCH_METHODS:
        report = evaluate(
            checkpoints[method], dataset, split_doc, seed,
            out / f"metrics_{method}.json", rf_test, digest, method=method,
        )
        logger.info("seed %d %s: accuracy %.4f", seed, method, report.accuracy)
        reports.append(report)
    return reports


def _run_seed_job(args: tuple[RunConfig, int, Path]) -> list[MetricsReport]:
    return run_seed(*args)


def run_bench(cfg: RunConfig, out_dir: PathLike, workers: int = 1, seeds: Optional[list[int]] = None) -> BenchReport:
    """
    Every method over every seed, summarized into `bench.json`.

    With several seeds and `workers` > 1 the seeds run in separate processes,
    each single-process inside; the report lists runs in seed order either way.
    """
    out = Path(out_dir)
    seeds = list(cfg.eval.seeds if seeds is None else seeds)
    runs: list[MetricsReport] = []
    if workers > 1 and len(seeds) > 1:
        jobs = [(cfg, seed, out / f"seed_{seed}") for seed in seeds]
        with ProcessPoolExecutor(max_workers=min(workers, len(seeds))) as pool:
            for reports in pool.map(_run_seed_job, jobs):
                runs.extend(reports)
    else:
        for seed in seeds:
            runs.extend(run_seed(cfg, seed, out / f"seed_{seed}", workers))
    summary = [summarize_runs(m, [r for r in runs if r.method == m]) for m in BENCH_METHODS]
    by_method = {s.method: s for s in summary}
    margin = by_method["fusion"].accuracy_mean - max(by_method["svm"].accuracy_mean, by_method["cnn"].accuracy_mean)
    report = BenchReport(seeds=seeds, runs=runs, summary=summary, fusion_margin=margin)
    write_doc(report, out / "bench.json")
    return report
