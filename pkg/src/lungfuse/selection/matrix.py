"""
FeatureMatrix — rows are samples, columns are named features.
"""

from collections import Counter
from collections.abc import Sequence

import numpy as np

from lungfuse.errors import FeatureError
from lungfuse.radiomics.features import FeatureVector


class FeatureMatrix:
    __slots__ = ("values", "names", "ids", "labels")

    def __init__(self, values: np.ndarray, names: Sequence[str], ids: Sequence[str], labels: Sequence[int]):
        values = np.array(values, dtype=np.float64)
        if values.ndim != 2:
            raise FeatureError("feature matrix must be 2-D", details={"ndim": int(values.ndim)})
        names, ids = list(names), list(ids)
        labels = np.array(labels, dtype=np.int64).reshape(-1)
        if values.shape != (len(ids), len(names)) or labels.size != len(ids):
            raise FeatureError(
                "feature matrix is not rectangular",
                details={"shape": list(values.shape), "names": len(names), "ids": len(ids), "labels": int(labels.size)},
            )
        dupes = [n for n, c in Counter(names).items() if c > 1]
        if dupes:
            raise FeatureError("duplicate feature names", details={"names": dupes[:10]})
        if not np.all(np.isfinite(values)):
            raise FeatureError("feature matrix contains non-finite values", code="non_finite_feature")
        values.flags.writeable = False
        labels.flags.writeable = False
        self.values = values
        self.names = names
        self.ids = ids
        self.labels = labels

    @classmethod
    def from_vectors(cls, ids: Sequence[str], labels: Sequence[int], vectors: Sequence[FeatureVector]) -> "FeatureMatrix":
        if not vectors:
            raise FeatureError("no feature vectors", code="empty_matrix")
        names = vectors[0].names
        for sid, v in zip(ids, vectors):
            if v.names != names:
                raise FeatureError("feature vectors have inconsistent names", details={"id": sid})
        return cls(np.stack([v.values for v in vectors]), names, ids, labels)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape  # type: ignore[return-value]

    def columns(self, indices: Sequence[int]) -> "FeatureMatrix":
        idx = np.asarray(indices, dtype=np.int64)
        return FeatureMatrix(self.values[:, idx], [self.names[i] for i in idx], self.ids, self.labels)

    def rows(self, ids: Sequence[str]) -> "FeatureMatrix":
        position = {sid: i for i, sid in enumerate(self.ids)}
        missing = [i for i in ids if i not in position]
        if missing:
            raise FeatureError("ids not in feature matrix", details={"ids": missing[:10]})
        idx = [position[i] for i in ids]
        return FeatureMatrix(self.values[idx], self.names, list(ids), self.labels[idx])

    def with_values(self, values: np.ndarray, names: Sequence[str]) -> "FeatureMatrix":
        return FeatureMatrix(values, names, self.ids, self.labels)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FeatureMatrix):
            return NotImplemented
        return (self.names == other.names and self.ids == other.ids
                and np.array_equal(self.labels, other.labels) and np.array_equal(self.values, other.values))

    def __repr__(self) -> str:
        return f"FeatureMatrix({self.shape[0]} samples × {self.shape[1]} features)"
