"""Pure-Python fallback for the compiled kernels.

Same operations in the same order as ``_kernels.pyx`` so results are
bit-identical between the two implementations (both perform plain IEEE
double adds/multiplies left to right).
"""


def seq_sum(a):
    s = 0.0
    for x in a:
        s = s + x
    return s


def seq_dot(a, b):
    if len(a) != len(b):
        raise ValueError("length mismatch")
    s = 0.0
    for i in range(len(a)):
        s = s + a[i] * b[i]
    return s


def psor_sweep(indptr, indices, data, diag, b, lower, u, relax):
    maxdelta = 0.0
    for row in range(len(diag)):
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
