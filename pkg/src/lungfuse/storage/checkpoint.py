"""
Model checkpoints — `<name>.json` header + `<name>.raw` little-endian float64
tensors, plus a `<name>.link.json` sidecar for models that consume RF.
"""

import json
from pathlib import Path
from typing import Optional, Union

import numpy as np
from pydantic import BaseModel, ValidationError

from lungfuse.config import ModelConfig
from lungfuse.errors import ArtifactError
from lungfuse.fusion.models import CNNModel, FusionModel
from lungfuse.fusion.svm import LinearSVM
from lungfuse.models.checkpoint import CheckpointHeader, ModelLink, TensorEntry, TrainingLog

PathLike = Union[str, Path]
AnyModel = Union[FusionModel, CNNModel, LinearSVM]
_DTYPE = np.dtype("<f8")


def _base(path: PathLike) -> Path:
    base = Path(path)
    return base.with_suffix("") if base.suffix in (".json", ".raw") else base


def _sibling(path: PathLike, suffix: str) -> Path:
    base = _base(path)
    return base.with_name(base.name + suffix)


def _write_json(path: Path, doc: BaseModel) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc.model_dump(mode="json"), indent=2))


def _read_json(path: Path, doc_type: type[BaseModel], what: str):
    if not path.exists():
        raise ArtifactError(f"{what} not found: {path}", code="missing_input")
    try:
        return doc_type.model_validate(json.loads(path.read_text()))
    except (json.JSONDecodeError, ValidationError) as e:
        raise ArtifactError(f"invalid {what} {path}: {e}", code="invalid_checkpoint") from e


def save_model(model: AnyModel, path: PathLike, model_cfg: ModelConfig, seed: int = 0, epoch: int = 0) -> Path:
    entries: list[TensorEntry] = []
    chunks: list[bytes] = []
    offset = 0
    for name, array in model.params.items():
        entries.append(TensorEntry(name=name, shape=list(array.shape), offset=offset))
        data = np.ascontiguousarray(array, dtype=_DTYPE).tobytes()
        chunks.append(data)
        offset += len(data)
    rf_width = None if isinstance(model, CNNModel) else model.rf_width
    header = CheckpointHeader(
        kind=model.kind,  # type: ignore[arg-type]
        model=model_cfg.model_dump(mode="json"),
        rf_width=rf_width,
        seed=seed,
        epoch=epoch,
        tensors=entries,
    )
    header_path = _sibling(path, ".json")
    _write_json(header_path, header)
    _sibling(path, ".raw").write_bytes(b"".join(chunks))
    return header_path


def load_model(path: PathLike) -> tuple[AnyModel, CheckpointHeader]:
    header: CheckpointHeader = _read_json(_sibling(path, ".json"), CheckpointHeader, "checkpoint header")
    raw_path = _sibling(path, ".raw")
    if not raw_path.exists():
        raise ArtifactError(f"checkpoint payload not found: {raw_path}", code="missing_input")
    payload = raw_path.read_bytes()
    params: dict[str, np.ndarray] = {}
    for entry in header.tensors:
        count = int(np.prod(entry.shape, dtype=np.int64))
        end = entry.offset + count * _DTYPE.itemsize
        if end > len(payload):
            raise ArtifactError(
                f"checkpoint payload too short for {entry.name}",
                code="size_mismatch",
                details={"needed_bytes": end, "actual_bytes": len(payload)},
            )
        flat = np.frombuffer(payload, dtype=_DTYPE, count=count, offset=entry.offset)
        params[entry.name] = flat.astype(np.float64).reshape(entry.shape)
    cfg = ModelConfig.model_validate(header.model)
    model: AnyModel
    if header.kind == "svm":
        model = LinearSVM(params["weights"], params["bias"], cfg.svm_c)
    elif header.kind == "fusion":
        model = FusionModel(cfg, params, header.rf_width or 0)
    else:
        model = CNNModel(cfg, params)
    return model, header


def save_link(path: PathLike, pipeline_sha256: str, rf_width: int) -> Path:
    link_path = _sibling(path, ".link.json")
    _write_json(link_path, ModelLink(pipeline_sha256=pipeline_sha256, rf_width=rf_width))
    return link_path


def load_link(path: PathLike) -> ModelLink:
    return _read_json(_sibling(path, ".link.json"), ModelLink, "model link")


def verify_link(path: PathLike, pipeline_sha256: str, rf_width: Optional[int] = None) -> ModelLink:
    """Refuse a checkpoint trained against a different selection pipeline."""
    link = load_link(path)
    if link.pipeline_sha256 != pipeline_sha256 or (rf_width is not None and link.rf_width != rf_width):
        raise ArtifactError(
            "checkpoint was trained against a different selection pipeline",
            code="pipeline_mismatch",
            details={"expected": link.pipeline_sha256, "got": pipeline_sha256, "rf_width": link.rf_width},
        )
    return link


def save_training_log(log: TrainingLog, path: PathLike) -> Path:
    log_path = _sibling(path, ".log.json")
    _write_json(log_path, log)
    return log_path
