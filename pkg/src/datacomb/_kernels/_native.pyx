# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled intersection kernels (sorted-merge two-pointer scans).

Inputs are strictly sorted, duplicate-free int64 arrays; see ``pure.py``
for the reference implementation of the same contract.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

NAME = "native"


cdef inline Py_ssize_t _merge_count(const long long* a, Py_ssize_t na,
                                    const long long* b, Py_ssize_t nb) noexcept nogil:
    cdef Py_ssize_t i = 0, j = 0, count = 0
    while i < na and j < nb:
        if a[i] < b[j]:
            i += 1
        elif a[i] > b[j]:
            j += 1
        else:
            count += 1
            i += 1
            j += 1
    return count


def intersect_size(const long long[::1] a, const long long[::1] b) -> int:
    """Size of the intersection of two sorted duplicate-free arrays."""
    if a.shape[0] == 0 or b.shape[0] == 0:
        return 0
    return _merge_count(&a[0], a.shape[0], &b[0], b.shape[0])


def intersect_size_many(const long long[::1] indptr, const long long[::1] indices,
                        const long long[::1] left, const long long[::1] right):
    """Intersection sizes for many column pairs of one CSR incidence index."""
    cdef Py_ssize_t n = left.shape[0]
    out_arr = np.empty(n, dtype=np.int64)
    cdef long long[::1] out = out_arr
    cdef Py_ssize_t k
    cdef long long la, lb, ra, rb
    if indices.shape[0] == 0:
        out_arr[:] = 0
        return out_arr
    with nogil:
        for k in range(n):
            la = indptr[left[k]]
            ra = indptr[left[k] + 1]
            lb = indptr[right[k]]
            rb = indptr[right[k] + 1]
            out[k] = _merge_count(&indices[la], ra - la, &indices[lb], rb - lb)
    return out_arr
