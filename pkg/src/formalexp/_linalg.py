"""Exact matrix helpers for square matrices of Series over one chart.

Entries may carry nonzero Z-degree, so products are formed strictly in
row-major order and every computed inverse is certified by multiplying
back on both sides.  Unimodular means: the row-major determinant is a
nonzero rational constant.
"""

from __future__ import annotations

from fractions import Fraction


class UnimodularityError(ValueError):
    pass


def identity_matrix(chart, n, nres=None, nform=None):
    return [[chart.one(nres, nform) if i == j else chart.zero(nres, nform)
             for j in range(n)] for i in range(n)]


def mat_mul(a, b):
    n = len(a)
    m = len(b[0])
    k = len(b)
    chart = a[0][0].chart
    nres, nform = a[0][0].nres, a[0][0].nform
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            s = chart.zero(nres, nform)
            for t in range(k):
                s = s + a[i][t] * b[t][j]
            row.append(s)
        out.append(row)
    return out


def mat_equal(a, b):
    return all(x == y for ra, rb in zip(a, b) for x, y in zip(ra, rb))


def _det(rows, cols, matrix, cache):
    """Determinant of the submatrix, factors multiplied top row first."""
    key = (rows, cols)
    if key in cache:
        return cache[key]
    chart = matrix[0][0].chart
    nres, nform = matrix[0][0].nres, matrix[0][0].nform
    if len(rows) == 1:
        out = matrix[rows[0]][cols[0]]
    else:
        out = chart.zero(nres, nform)
        r = rows[0]
        rest = rows[1:]
        for idx, c in enumerate(cols):
            entry = matrix[r][c]
            if entry.is_zero():
                continue
            minor = _det(rest, cols[:idx] + cols[idx + 1:], matrix, cache)
            term = entry * minor
            out = out + (term if idx % 2 == 0 else -term)
    cache[key] = out
    return out


def mat_det(matrix):
    n = len(matrix)
    idx = tuple(range(n))
    return _det(idx, idx, matrix, {})


def mat_adjugate(matrix):
    n = len(matrix)
    if n == 1:
        chart = matrix[0][0].chart
        return [[chart.one(matrix[0][0].nres, matrix[0][0].nform)]]
    cache = {}
    idx = tuple(range(n))
    adj = [[None] * n for _ in range(n)]
    for i in range(n):
        rows = idx[:i] + idx[i + 1:]
        for j in range(n):
            cols = idx[:j] + idx[j + 1:]
            minor = _det(rows, cols, matrix, cache)
            adj[j][i] = minor if (i + j) % 2 == 0 else -minor
    return adj


def unimodular_inverse(matrix):
    """Inverse via the adjugate, demanding a nonzero constant determinant.

    Returns (inverse, det).  The product is certified on both sides; a
    failure there means the graded entries defeat the adjugate formula
    and the matrix is rejected.
    """
    n = len(matrix)
    chart = matrix[0][0].chart
    nres, nform = matrix[0][0].nres, matrix[0][0].nform
    det = mat_det(matrix)
    c = det.constant_value()
    if c is None:
        raise UnimodularityError("determinant %s is not constant" % det.to_str())
    if c == 0:
        raise UnimodularityError("determinant is zero")
    adj = mat_adjugate(matrix)
    inv = [[entry.scale(Fraction(1, 1) / c) for entry in row] for row in adj]
    ident = identity_matrix(chart, n, nres, nform)
    if not mat_equal(mat_mul(matrix, inv), ident) or \
            not mat_equal(mat_mul(inv, matrix), ident):
        raise UnimodularityError(
            "adjugate inverse failed certification on graded entries")
    return inv, c
