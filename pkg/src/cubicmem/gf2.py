"""Dense GF(2) linear algebra on numpy 0/1 matrices and packed-int rows.

The numpy forms back homology computations; the packed-int forms are for
hot enumeration loops where rows fit in machine words.
"""

from __future__ import annotations

import numpy as np


def rref(mat):
    """Reduced row echelon form; returns (reduced copy, pivot column list)."""
    a = (np.asarray(mat, dtype=np.uint8) % 2).copy()
    rows, cols = a.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        hit = np.flatnonzero(a[r:, c])
        if hit.size == 0:
            continue
        pr = r + hit[0]
        if pr != r:
            a[[r, pr]] = a[[pr, r]]
        others = np.flatnonzero(a[:, c])
        others = others[others != r]
        a[others] ^= a[r]
        pivots.append(c)
        r += 1
    return a, pivots


def rank(mat):
    return len(rref(mat)[1])


def kernel_basis(mat):
    """Basis of the right null space, one row per basis vector."""
    a, pivots = rref(mat)
    cols = a.shape[1]
    free = [c for c in range(cols) if c not in pivots]
    out = np.zeros((len(free), cols), dtype=np.uint8)
    for i, fc in enumerate(free):
        out[i, fc] = 1
        for r, pc in enumerate(pivots):
            out[i, pc] = a[r, fc]
    return out


def solve(mat, rhs):
    """One solution of mat @ x = rhs over GF(2), or None if inconsistent."""
    a = np.asarray(mat, dtype=np.uint8) % 2
    b = (np.asarray(rhs, dtype=np.uint8) % 2).reshape(-1, 1)
    aug, pivots = rref(np.hstack([a, b]))
    cols = a.shape[1]
    if cols in pivots:
        return None
    x = np.zeros(cols, dtype=np.uint8)
    for r, c in enumerate(pivots):
        x[c] = aug[r, cols]
    return x


def in_row_space(rows, vec):
    if len(rows) == 0:
        return not np.any(np.asarray(vec) % 2)
    return solve(np.asarray(rows).T, vec) is not None


# -- packed-int rows ---------------------------------------------------------

def int_rank(rows):
    """Rank of a list of GF(2) rows stored as python ints."""
    basis = []
    r = 0
    for row in rows:
        for b in basis:
            row = min(row, row ^ b)
        if row:
            basis.append(row)
            basis.sort(reverse=True)
            r += 1
    return r


def int_kernel(rows, ncols):
    """Kernel basis (as ints over `ncols` variables) of the stacked rows."""
    mat = np.zeros((len(rows), ncols), dtype=np.uint8)
    for i, row in enumerate(rows):
        for c in range(ncols):
            if (row >> c) & 1:
                mat[i, c] = 1
    out = []
    for vec in kernel_basis(mat):
        out.append(int(sum(1 << c for c in np.flatnonzero(vec))))
    return out
