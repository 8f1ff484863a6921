from lungfuse.storage.checkpoint import load_link, load_model, save_link, save_model, save_training_log, verify_link
from lungfuse.storage.container import load_mask, load_volume, save_mask, save_volume
from lungfuse.storage.dataset import load_dataset, load_manifest, save_dataset
from lungfuse.storage.tables import load_matrix, save_matrix

__all__ = [
    "load_dataset",
    "load_link",
    "load_manifest",
    "load_mask",
    "load_matrix",
    "load_model",
    "load_volume",
    "save_dataset",
    "save_link",
    "save_mask",
    "save_matrix",
    "save_model",
    "save_training_log",
    "save_volume",
    "verify_link",
]
