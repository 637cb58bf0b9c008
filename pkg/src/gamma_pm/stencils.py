"""Sparse finite-difference operators and quadrature weights on node grids.

Interior rows are second-order central differences; the end rows use
one-sided second-order stencils so every operator is second order up to the
boundary.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp


def d1_matrix(n, h):
    """First derivative, central inside, one-sided (-3, 4, -1)/(2h) at the ends."""
    if n < 3:
        raise ValueError("need at least 3 nodes for D1")
    rows = [0, 0, 0]
    cols = [0, 1, 2]
    vals = [-3.0, 4.0, -1.0]
    i = np.arange(1, n - 1)
    rows += list(np.repeat(i, 2))
    cols += list(np.ravel(np.column_stack([i - 1, i + 1])))
    vals += [-1.0, 1.0] * (n - 2)
    rows += [n - 1] * 3
    cols += [n - 3, n - 2, n - 1]
    vals += [1.0, -4.0, 3.0]
    return sp.csr_matrix((np.array(vals) / (2.0 * h), (rows, cols)), shape=(n, n))


def d2_matrix(n, h):
    """Second derivative, central inside, one-sided (2, -5, 4, -1)/h^2 at the ends."""
    if n < 4:
        raise ValueError("need at least 4 nodes for D2")
    rows = [0] * 4
    cols = [0, 1, 2, 3]
    vals = [2.0, -5.0, 4.0, -1.0]
    i = np.arange(1, n - 1)
    rows += list(np.repeat(i, 3))
    cols += list(np.ravel(np.column_stack([i - 1, i, i + 1])))
    vals += [1.0, -2.0, 1.0] * (n - 2)
    rows += [n - 1] * 4
    cols += [n - 4, n - 3, n - 2, n - 1]
    vals += [-1.0, 4.0, -5.0, 2.0]
    return sp.csr_matrix((np.array(vals) / (h * h), (rows, cols)), shape=(n, n))


def trapezoid_weights(n, h):
    w = np.full(n, float(h))
    w[0] = w[-1] = 0.5 * h
    return w


def periodic_d1(n, h):
    e = np.ones(n)
    D = sp.diags([-e[:-1], e[:-1]], [-1, 1], shape=(n, n), format="lil")
    D[0, n - 1] = -1.0
    D[n - 1, 0] = 1.0
    return (D.tocsr() / (2.0 * h)).tocsr()


def periodic_d2(n, h):
    e = np.ones(n)
    D = sp.diags([e[:-1], -2.0 * e, e[:-1]], [-1, 0, 1], shape=(n, n), format="lil")
    D[0, n - 1] = 1.0
    D[n - 1, 0] = 1.0
    return (D.tocsr() / (h * h)).tocsr()


def forward_diff_periodic(n, h):
    """(u_{i+1} - u_i)/h with wrap-around."""
    e = np.ones(n)
    D = sp.diags([-e, e[:-1]], [0, 1], shape=(n, n), format="lil")
    D[n - 1, 0] = 1.0
    return (D.tocsr() / h).tocsr()


def bandwidth(A):
    A = sp.coo_matrix(A)
    if A.nnz == 0:
        return 0
    return int(np.max(np.abs(A.row - A.col)))


def to_banded_upper(A, k):
    """Upper banded storage of a symmetric sparse matrix for ``cholesky_banded``."""
    A = sp.csr_matrix(A)
    n = A.shape[0]
    ab = np.zeros((k + 1, n))
    for d in range(k + 1):
        ab[k - d, d:] = A.diagonal(d)
    return ab


def to_banded_general(A, kl, ku):
    """Banded storage for ``solve_banded`` with (kl, ku) off-diagonals."""
    A = sp.csr_matrix(A)
    n = A.shape[0]
    ab = np.zeros((kl + ku + 1, n))
    for d in range(-kl, ku + 1):
        diag = A.diagonal(d)
        if d >= 0:
            ab[ku - d, d:] = diag
        else:
            ab[ku - d, : n + d] = diag
    return ab
