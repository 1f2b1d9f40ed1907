"""Sparse BLAS reference kernels for SciPy CSR matrices.

Inputs are converted to canonical CSR (sorted, no duplicates, int32 column
indices, int64 row offsets) before they reach the C++ kernels.
"""

import numpy as np
import scipy.sparse as sp

from . import _spblas
from ._spblas import get_cnr, set_cnr

__all__ = [
    "add",
    "from_dense",
    "get_cnr",
    "mm_read",
    "mm_write",
    "multiply",
    "multiply_elementwise",
    "norm",
    "sddmm",
    "set_cnr",
    "sparse_multiply",
    "transpose",
    "triangular_solve",
    "validate",
]


def _parts(a):
    a = sp.csr_matrix(a, dtype=np.float64)
    a.sum_duplicates()
    a.sort_indices()
    return (
        np.ascontiguousarray(a.data),
        a.indptr.astype(np.int64),
        a.indices.astype(np.int32),
        a.shape,
    )


def _csr(parts, shape):
    data, indptr, indices = parts
    return sp.csr_matrix((data, indices, indptr), shape=shape)


def validate(data, indptr, indices, shape):
    """List of (violation, index) pairs for raw CSR arrays; empty when valid."""
    return _spblas.validate(
        np.asarray(data, dtype=np.float64),
        np.asarray(indptr, dtype=np.int64),
        np.asarray(indices, dtype=np.int32),
        tuple(shape),
    )


def multiply(a, x, alpha=1.0, beta=0.0, y=None, transpose=False, policy="seq", threads=0):
    """alpha * op(A) @ x (+ beta * y). x may be a vector or a 2-D array."""
    d, p, i, shape = _parts(a)
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 2:
        if transpose or y is not None:
            raise ValueError("matrix right-hand sides support neither transpose nor y")
        return _spblas.spmm(d, p, i, shape, x, alpha, policy, threads)
    return _spblas.spmv(d, p, i, shape, x, alpha, beta, y, transpose, policy, threads)


def sparse_multiply(a, b, policy="seq", threads=0):
    """Sparse product A @ B; numerically zero products stay stored."""
    pa, pb = _parts(a), _parts(b)
    return _csr(_spblas.spgemm(*pa, *pb, policy, threads), (pa[3][0], pb[3][1]))


def add(a, b, alpha=1.0, beta=1.0, policy="seq", threads=0):
    """alpha * A + beta * B over the union of the patterns."""
    pa, pb = _parts(a), _parts(b)
    if pa[3] != pb[3]:
        raise ValueError("add: shapes differ")
    return _csr(_spblas.add(*pa[:3], *pb[:3], pa[3], alpha, beta, policy, threads), pa[3])


def multiply_elementwise(a, b, policy="seq", threads=0):
    """Hadamard product over the intersection of the patterns."""
    pa, pb = _parts(a), _parts(b)
    if pa[3] != pb[3]:
        raise ValueError("multiply_elementwise: shapes differ")
    return _csr(_spblas.multiply_elementwise(*pa[:3], *pb[:3], pa[3], policy, threads), pa[3])


def transpose(a):
    d, p, i, shape = _parts(a)
    return _csr(_spblas.transpose(d, p, i, shape), (shape[1], shape[0]))


def from_dense(dense):
    """CSR of the nonzero entries of a dense matrix (NaN counts as nonzero)."""
    dense = np.asarray(dense, dtype=np.float64)
    return _csr(_spblas.from_dense(dense), dense.shape)


def triangular_solve(t, b, transpose=False, policy="seq", threads=0):
    d, p, i, shape = _parts(t)
    return _spblas.triangular_solve(d, p, i, shape, np.asarray(b, dtype=np.float64), transpose,
                                    policy, threads)


def norm(a, kind="fro", policy="seq", threads=0):
    d, p, i, shape = _parts(a)
    return _spblas.norm(d, p, i, shape, kind, policy, threads)


def sddmm(x, y, mask, alpha=1.0):
    """alpha * (X @ Y) sampled at the stored positions of mask."""
    _, p, i, shape = _parts(mask)
    vals = _spblas.sddmm(np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64), p, i,
                         shape, alpha)
    return _csr((vals, p, i), shape)


def mm_read(path):
    data, rows, cols, shape = _spblas.mm_read(str(path))
    return sp.csr_matrix(sp.coo_matrix((data, (rows, cols)), shape=shape))


def mm_write(path, a):
    d, p, i, shape = _parts(a)
    _spblas.mm_write(str(path), d, p, i, shape)
