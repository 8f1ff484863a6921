"""
Dataset directory — `manifest.json` plus one volume and one mask container per sample.
"""

import json
import logging
from pathlib import Path
from typing import Union

from pydantic import TypeAdapter, ValidationError

from lungfuse.errors import ArtifactError
from lungfuse.models.volume import ManifestEntry
from lungfuse.storage.container import load_mask, load_volume, save_mask, save_volume
from lungfuse.volume import Dataset, NoduleSample

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
_manifest_adapter = TypeAdapter(list[ManifestEntry])


def save_dataset(dataset: Dataset, out_dir: Union[str, Path]) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = dataset.manifest()
    for sample, entry in zip(dataset, entries):
        save_volume(sample.patch, out / entry.volume_path)
        save_mask(sample.mask, out / entry.mask_path, sample.patch.spacing)
    manifest_path = out / MANIFEST_NAME
    manifest_path.write_text(json.dumps([e.model_dump() for e in entries], indent=2))
    logger.info("wrote %d samples to %s", len(entries), out)
    return manifest_path


def load_manifest(dataset_dir: Union[str, Path]) -> list[ManifestEntry]:
    path = Path(dataset_dir) / MANIFEST_NAME
    if not path.exists():
        raise ArtifactError(f"dataset manifest not found: {path}", code="missing_input")
    try:
        return _manifest_adapter.validate_python(json.loads(path.read_text()))
    except (json.JSONDecodeError, ValidationError) as e:
        raise ArtifactError(f"invalid manifest {path}: {e}", code="invalid_manifest") from e


def load_dataset(dataset_dir: Union[str, Path]) -> Dataset:
    root = Path(dataset_dir)
    samples = [
        NoduleSample(e.id, load_volume(root / e.volume_path), load_mask(root / e.mask_path), e.label)
        for e in load_manifest(root)
    ]
    return Dataset(samples)
