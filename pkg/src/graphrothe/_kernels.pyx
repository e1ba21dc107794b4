# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels.

Arithmetic here must stay bit-identical to the pure-Python fallback in
``_kernels_py``: plain IEEE double operations in the same order, no
reassociation, no fused multiply-add. Do not enable -ffast-math.
"""


def seq_sum(double[::1] a):
    """Strict left-to-right sum of ``a`` (ascending-index order)."""
    cdef double s = 0.0
    cdef Py_ssize_t i
    for i in range(a.shape[0]):
        s = s + a[i]
    return s


def seq_dot(double[::1] a, double[::1] b):
    """Strict left-to-right sum of ``a[i] * b[i]``."""
    cdef double s = 0.0
    cdef Py_ssize_t i
    if a.shape[0] != b.shape[0]:
        raise ValueError("length mismatch")
    for i in range(a.shape[0]):
        s = s + a[i] * b[i]
    return s


def psor_sweep(long long[::1] indptr, long long[::1] indices,
               double[::1] data, double[::1] diag,
               double[::1] b, double[::1] lower,
               double[::1] u, double relax):
    """One projected SOR sweep for S u = b subject to u >= lower.

    Rows are visited in ascending index order; ``u`` is updated in place.
    ``data`` holds the full rows of S including the diagonal entries.
    Returns the largest absolute update applied during the sweep.
    """
    cdef Py_ssize_t n = diag.shape[0]
    cdef Py_ssize_t row, k
    cdef double acc, cand, delta, maxdelta = 0.0
    for row in range(n):
        acc = 0.0
        for k in range(indptr[row], indptr[row + 1]):
            acc = acc + data[k] * u[indices[k]]
        cand = u[row] + relax * (b[row] - acc) / diag[row]
        if cand < lower[row]:
            cand = lower[row]
        delta = cand - u[row]
        if delta < 0.0:
            delta = -delta
        if delta > maxdelta:
            maxdelta = delta
        u[row] = cand
    return maxdelta
