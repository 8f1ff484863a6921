"""
The 13 unique 3D neighbour directions (one of each ± pair) and shifted views.
"""

import itertools

import numpy as np

# first nonzero component positive; closed under the cube's rotation group up to sign
DIRECTIONS_13: tuple[tuple[int, int, int], ...] = tuple(
    d for d in itertools.product((-1, 0, 1), repeat=3)
    if d != (0, 0, 0) and next(c for c in d if c != 0) > 0
)


def paired_views(array: np.ndarray, offset: tuple[int, int, int]) -> tuple[np.ndarray, np.ndarray]:
    """Views (a, b) such that b[p] is array[p + offset] wherever both are in bounds."""
    src: list[slice] = []
    dst: list[slice] = []
    for d, n in zip(offset, array.shape):
        if d >= 0:
            src.append(slice(0, max(n - d, 0)))
            dst.append(slice(d, n))
        else:
            src.append(slice(-d, n))
            dst.append(slice(0, max(n + d, 0)))
    return array[tuple(src)], array[tuple(dst)]
