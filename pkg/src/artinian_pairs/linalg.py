"""Exact linear algebra over the coefficient fields.

Matrices are lists of rows of field elements.  Prime fields route through
numpy int64 arrays (entries stay far below 2^63, so arithmetic is exact);
F_2(u,v) uses a generic fraction-based elimination.  All echelon forms are
reduced, with the first nonzero entry of each row as pivot, so bases are
canonical and comparable.
"""

from __future__ import annotations

import numpy as np


def _to_np(rows, p):
    a = np.array(rows, dtype=np.int64)
    if a.ndim == 1:
        a = a.reshape(1, -1)
    return a % p


def rref_np(a, p):
    """Reduced row echelon of an int64 array mod p; returns (array, pivots)."""
    m = a % p
    rows, cols = m.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(m[r:, c])[0]
        if len(nz) == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            m[[r, i]] = m[[i, r]]
        m[r] = (m[r] * pow(int(m[r, c]), p - 2, p)) % p
        col = m[:, c].copy()
        col[r] = 0
        m = (m - np.outer(col, m[r])) % p
        pivots.append(c)
        r += 1
    return m[:r], pivots


def _rref_generic(field, rows):
    m = [list(r) for r in rows]
    if not m:
        return [], []
    cols = len(m[0])
    pivots = []
    r = 0
    for c in range(cols):
        if r == len(m):
            break
        pr = None
        for i in range(r, len(m)):
            if not field.is_zero(m[i][c]):
                pr = i
                break
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        inv = field.inv(m[r][c])
        m[r] = [field.mul(inv, x) for x in m[r]]
        for i in range(len(m)):
            if i != r and not field.is_zero(m[i][c]):
                f = m[i][c]
                m[i] = [field.sub(a, field.mul(f, b)) for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    return m[:r], pivots


def rref(field, rows):
    """Reduced row echelon form; returns (rows, pivot columns)."""
    if not rows:
        return [], []
    if field.kind == "prime":
        m, piv = rref_np(_to_np(rows, field.p), field.p)
        return [[int(x) for x in row] for row in m], piv
    return _rref_generic(field, rows)


def span_basis(field, vectors):
    """Canonical basis (reduced echelon rows) of the span of the vectors."""
    return rref(field, vectors)[0]


def rank(field, rows):
    return len(rref(field, rows)[0])


def extend_span(field, basis_rows, pivots, new_vectors):
    """Echelon-extend a reduced basis by new vectors; returns (rows, pivots).

    Cheaper than re-echelonizing from scratch when called iteratively.
    """
    rows = [list(r) for r in basis_rows] + [list(v) for v in new_vectors]
    return rref(field, rows)


def coords_in_rows(field, basis_rows, pivots, v):
    """Coordinates of v in a reduced echelon basis, or None if outside."""
    coeffs = []
    v = list(v)
    for row, p in zip(basis_rows, pivots):
        c = v[p]
        coeffs.append(c)
        if not field.is_zero(c):
            v = [field.sub(a, field.mul(c, b)) for a, b in zip(v, row)]
    if any(not field.is_zero(x) for x in v):
        return None
    return coeffs


def in_span(field, basis_rows, pivots, v):
    return coords_in_rows(field, basis_rows, pivots, v) is not None


def kernel_basis_with_free(field, rows, ncols=None):
    """Kernel basis plus its free columns.

    Each basis vector has a 1 at its own free column and 0 at the others, so
    the coordinates of any kernel element in this basis can be read off at
    the free positions.
    """
    if not rows:
        if ncols is None:
            return [], []
        return identity(field, ncols), list(range(ncols))
    ncols = len(rows[0])
    red, piv = rref(field, rows)
    pivset = set(piv)
    free = [c for c in range(ncols) if c not in pivset]
    basis = []
    for f in free:
        vec = [field.zero()] * ncols
        vec[f] = field.one()
        for row, pc in zip(red, piv):
            vec[pc] = field.neg(row[f])
        basis.append(vec)
    return basis, free


def kernel_basis(field, rows, ncols=None):
    """Canonical basis of the right kernel {x : rows . x = 0}."""
    return kernel_basis_with_free(field, rows, ncols)[0]


def solve(field, rows, rhs):
    """One solution x of rows . x = rhs, or None if inconsistent."""
    if not rows:
        return None
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    red, piv = rref(field, aug)
    ncols = len(rows[0])
    for row, pc in zip(red, piv):
        if pc == ncols:
            return None
    x = [field.zero()] * ncols
    for row, pc in zip(red, piv):
        x[pc] = row[ncols]
    return x


def matmul(field, a, b):
    if field.kind == "prime":
        p = field.p
        prod = (_to_np(a, p) @ _to_np(b, p)) % p
        return [[int(x) for x in row] for row in prod]
    out = []
    for row in a:
        orow = []
        for j in range(len(b[0])):
            acc = field.zero()
            for k, x in enumerate(row):
                if not field.is_zero(x):
                    acc = field.add(acc, field.mul(x, b[k][j]))
            orow.append(acc)
        out.append(orow)
    return out


def mat_vec(field, a, v):
    return [r[0] for r in matmul(field, a, [[x] for x in v])]


def identity(field, n):
    one, zero = field.one(), field.zero()
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def mat_inv(field, a):
    """Inverse of a square matrix, or None when singular."""
    n = len(a)
    aug = [list(r) + list(e) for r, e in zip(a, identity(field, n))]
    red, piv = rref(field, aug)
    if piv[:n] != list(range(n)):
        return None
    return [row[n:] for row in red]


def is_invertible(field, a):
    n = len(a)
    if n == 0:
        return True
    if any(len(r) != n for r in a):
        return False
    return rank(field, a) == n


def complement_projector(field, basis_rows, pivots, dim):
    """Matrix of the quotient map k^dim -> k^dim / span(basis).

    Rows are indexed by the non-pivot coordinates; applying the matrix to v
    gives the coordinates of v mod the subspace, in the complement basis
    given by the non-pivot standard vectors.
    """
    pivset = set(pivots)
    free = [c for c in range(dim) if c not in pivset]
    zero, one = field.zero(), field.one()
    proj = []
    for f in free:
        row = [zero] * dim
        row[f] = one
        for brow, pc in zip(basis_rows, pivots):
            row[pc] = field.neg(brow[f])
        proj.append(row)
    return proj, free
