"""Row-batch kernels over CSR storage.

The optimizers evaluate gradients on tiny row batches millions of times
per run; scipy fancy indexing is ~100x too slow for that, so these loops
are compiled with numba when available and fall back to plain Python
otherwise.
"""

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


@njit(cache=True)
def rows_dot(data, indices, indptr, idx, w):
    """out[j] = row idx[j] dot w."""
    out = np.empty(idx.shape[0])
    for j in range(idx.shape[0]):
        r = idx[j]
        acc = 0.0
        for p in range(indptr[r], indptr[r + 1]):
            acc += data[p] * w[indices[p]]
        out[j] = acc
    return out


@njit(cache=True)
def rows_dot_two(data, indices, indptr, idx, w_a, w_b):
    """Row dot products against two points in one pass."""
    out_a = np.empty(idx.shape[0])
    out_b = np.empty(idx.shape[0])
    for j in range(idx.shape[0]):
        r = idx[j]
        acc_a = 0.0
        acc_b = 0.0
        for p in range(indptr[r], indptr[r + 1]):
            v = data[p]
            c = indices[p]
            acc_a += v * w_a[c]
            acc_b += v * w_b[c]
        out_a[j] = acc_a
        out_b[j] = acc_b
    return out_a, out_b


@njit(cache=True)
def rows_scatter(data, indices, indptr, idx, coef, out):
    """out += sum_j coef[j] * row idx[j]."""
    for j in range(idx.shape[0]):
        r = idx[j]
        c = coef[j]
        for p in range(indptr[r], indptr[r + 1]):
            out[indices[p]] += c * data[p]
