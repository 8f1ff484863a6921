"""
FeatureVector — ordered, uniquely named, finite feature values.
"""

from collections import Counter
from collections.abc import Iterable, Sequence
from typing import Iterator

import numpy as np

from lungfuse.errors import FeatureError


class FeatureVector:
    __slots__ = ("names", "values")

    def __init__(self, names: Sequence[str], values: Sequence[float]):
        names = list(names)
        values = np.array(values, dtype=np.float64).reshape(-1)
        if len(names) != values.size:
            raise FeatureError("feature names and values differ in length",
                               details={"names": len(names), "values": int(values.size)})
        if len(set(names)) != len(names):
            dupes = [n for n, c in Counter(names).items() if c > 1]
            raise FeatureError("duplicate feature names", details={"names": dupes[:10]})
        bad = [n for n, v in zip(names, values) if not np.isfinite(v)]
        if bad:
            raise FeatureError("non-finite feature values", code="non_finite_feature", details={"names": bad[:20]})
        values.flags.writeable = False
        self.names: list[str] = names
        self.values: np.ndarray = values

    @classmethod
    def from_dict(cls, mapping: dict[str, float]) -> "FeatureVector":
        return cls(list(mapping), list(mapping.values()))

    @classmethod
    def concat(cls, vectors: Iterable["FeatureVector"]) -> "FeatureVector":
        names: list[str] = []
        values: list[np.ndarray] = []
        for v in vectors:
            names.extend(v.names)
            values.append(v.values)
        return cls(names, np.concatenate(values) if values else np.zeros(0))

    def prefixed(self, prefix: str) -> "FeatureVector":
        return FeatureVector([f"{prefix}_{n}" for n in self.names], self.values)

    def as_dict(self) -> dict[str, float]:
        return {n: float(v) for n, v in zip(self.names, self.values)}

    def __getitem__(self, name: str) -> float:
        try:
            return float(self.values[self.names.index(name)])
        except ValueError:
            raise KeyError(name) from None

    def __len__(self) -> int:
        return len(self.names)

    def __iter__(self) -> Iterator[tuple[str, float]]:
        return iter(zip(self.names, (float(v) for v in self.values)))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FeatureVector):
            return NotImplemented
        return self.names == other.names and np.array_equal(self.values, other.values)

    def __repr__(self) -> str:
        return f"FeatureVector({len(self)} features)"
