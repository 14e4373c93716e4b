"""Numpy fallback for the intersection kernels.

Same contract as the compiled module: inputs are strictly sorted,
duplicate-free int64 arrays (columns of an incidence index in CSR form).
"""

from __future__ import annotations

import numpy as np

NAME = "pure"


def intersect_size(a: np.ndarray, b: np.ndarray) -> int:
    """Size of the intersection of two sorted duplicate-free arrays."""
    if a.size == 0 or b.size == 0:
        return 0
    return int(np.intersect1d(a, b, assume_unique=True).size)


def intersect_size_many(
    indptr: np.ndarray, indices: np.ndarray, left: np.ndarray, right: np.ndarray
) -> np.ndarray:
    """Intersection sizes for many column pairs of one CSR incidence index.

    ``left[k]``/``right[k]`` are column positions; returns an int64 array of
    the same length.
    """
    out = np.empty(left.size, dtype=np.int64)
    for k in range(left.size):
        a = indices[indptr[left[k]] : indptr[left[k] + 1]]
        b = indices[indptr[right[k]] : indptr[right[k] + 1]]
        out[k] = intersect_size(a, b)
    return out
