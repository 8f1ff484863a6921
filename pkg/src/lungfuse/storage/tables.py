"""
FeatureMatrix CSV — `id`, `label`, then one column per feature.

Floats are written in shortest round-trip form and parsed back with
round-trip precision, so a reload is bit-exact.
"""

import io
from pathlib import Path
from typing import Union

import pandas as pd

from lungfuse.errors import ArtifactError
from lungfuse.selection.matrix import FeatureMatrix

ID_COLUMN = "id"
LABEL_COLUMN = "label"


def matrix_to_csv(matrix: FeatureMatrix) -> str:
    frame = pd.DataFrame(matrix.values, columns=matrix.names)
    frame.insert(0, LABEL_COLUMN, matrix.labels)
    frame.insert(0, ID_COLUMN, matrix.ids)
    return frame.to_csv(index=False, lineterminator="\n")


def save_matrix(matrix: FeatureMatrix, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(matrix_to_csv(matrix))
    return path


def load_matrix(path: Union[str, Path]) -> FeatureMatrix:
    path = Path(path)
    if not path.exists():
        raise ArtifactError(f"feature table not found: {path}", code="missing_input")
    frame = pd.read_csv(io.StringIO(path.read_text()), dtype={ID_COLUMN: str}, float_precision="round_trip")
    if list(frame.columns[:2]) != [ID_COLUMN, LABEL_COLUMN]:
        raise ArtifactError(f"{path} must start with columns id,label", code="invalid_table")
    names = [str(c) for c in frame.columns[2:]]
    return FeatureMatrix(
        frame[names].to_numpy(dtype="float64"),
        names,
        frame[ID_COLUMN].tolist(),
        frame[LABEL_COLUMN].to_numpy(dtype="int64"),
    )
