"""Small exact linear algebra over ``Fraction`` (also works on floats).

Matrices are numpy arrays; exact ones have ``dtype=object`` holding
:class:`fractions.Fraction` entries. Sizes here never exceed 20x20, so plain
Gaussian elimination is adequate.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np


def is_exact(M) -> bool:
    return np.asarray(M).dtype == object


def as_exact(M) -> np.ndarray:
    M = np.asarray(M, dtype=object)
    return np.vectorize(Fraction, otypes=[object])(M) if M.size else M


def identity(n: int, exact: bool = True) -> np.ndarray:
    if not exact:
        return np.eye(n)
    I = np.full((n, n), Fraction(0), dtype=object)
    for i in range(n):
        I[i, i] = Fraction(1)
    return I


def zeros(shape, exact: bool = True) -> np.ndarray:
    if not exact:
        return np.zeros(shape)
    return np.full(shape, Fraction(0), dtype=object)


def _is_zero(x, tol):
    return x == 0 if tol is None else abs(x) <= tol


def row_echelon(M, tol: float | None = None):
    """Reduced row echelon form and pivot columns.

    ``tol=None`` means exact zero tests.
    """
    A = [list(r) for r in np.asarray(M).tolist()]
    rows = len(A)
    cols = len(A[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        if tol is None:
            p = next((i for i in range(r, rows) if A[i][c] != 0), None)
        else:
            p = max(range(r, rows), key=lambda i: abs(A[i][c]))
            if abs(A[p][c]) <= tol:
                p = None
        if p is None:
            continue
        A[r], A[p] = A[p], A[r]
        piv = A[r][c]
        A[r] = [x / piv for x in A[r]]
        for i in range(rows):
            if i != r and not _is_zero(A[i][c], None):
                f = A[i][c]
                A[i] = [x - f * y for x, y in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
    return A, pivots


def rank(M, tol: float | None = None) -> int:
    return len(row_echelon(M, tol)[1])


def nullspace(M, tol: float | None = None) -> list[list]:
    """Basis of ``{x : M x = 0}`` read off the reduced echelon form."""
    M = np.asarray(M)
    cols = M.shape[1]
    R, pivots = row_echelon(M, tol)
    one, zero = (Fraction(1), Fraction(0)) if tol is None else (1.0, 0.0)
    basis = []
    for free in (c for c in range(cols) if c not in pivots):
        v = [zero] * cols
        v[free] = one
        for row, pc in enumerate(pivots):
            v[pc] = -R[row][free]
        basis.append(v)
    return basis


def det(M):
    A = [list(r) for r in np.asarray(M).tolist()]
    n = len(A)
    d = Fraction(1) if is_exact(M) else 1.0
    for c in range(n):
        if is_exact(M):
            p = next((i for i in range(c, n) if A[i][c] != 0), None)
        else:
            p = max(range(c, n), key=lambda i: abs(A[i][c]))
            if A[p][c] == 0:
                p = None
        if p is None:
            return d * 0
        if p != c:
            A[c], A[p] = A[p], A[c]
            d = -d
        d *= A[c][c]
        for i in range(c + 1, n):
            f = A[i][c] / A[c][c]
            if f != 0:
                A[i] = [x - f * y for x, y in zip(A[i], A[c])]
    return d


def inverse(M) -> np.ndarray:
    M = np.asarray(M)
    if not is_exact(M):
        return np.linalg.inv(M)
    n = M.shape[0]
    aug = np.concatenate([M, identity(n)], axis=1)
    R, pivots = row_echelon(aug)
    if pivots[:n] != list(range(n)):
        raise np.linalg.LinAlgError("singular matrix")
    return np.array([row[n:] for row in R], dtype=object)


def signature(Q, tol: float | None = None) -> tuple[int, int, int]:
    """Inertia ``(positive, negative, zero)`` of a symmetric matrix.

    Symmetric Gaussian reduction (Sylvester's law of inertia). A zero
    diagonal with a nonzero off-diagonal entry ``q_ij`` is handled by adding
    row/column ``j`` to ``i`` first, which creates the diagonal entry
    ``2 q_ij`` (a hyperbolic pair then contributes one of each sign).
    ``tol=None`` means exact arithmetic.
    """
    A = [list(r) for r in np.asarray(Q).tolist()]
    n = len(A)
    for i in range(n):
        for j in range(i):
            if not _is_zero(A[i][j] - A[j][i], tol):
                raise ValueError("signature needs a symmetric matrix")
    pos = neg = 0
    active = list(range(n))
    while active:
        d = next((i for i in active if not _is_zero(A[i][i], tol)), None)
        if d is None:
            pair = next(((i, j) for i in active for j in active
                         if i != j and not _is_zero(A[i][j], tol)), None)
            if pair is None:
                break
            i, j = pair
            for k in range(n):
                A[i][k] = A[i][k] + A[j][k]
            for k in range(n):
                A[k][i] = A[k][i] + A[k][j]
            d = i
        piv = A[d][d]
        if piv > 0:
            pos += 1
        else:
            neg += 1
        active.remove(d)
        for i in active:
            f = A[i][d] / piv
            if not _is_zero(f, None):
                for k in active:
                    A[i][k] = A[i][k] - f * A[d][k]
        for i in active:
            A[i][d] = A[d][i] = 0 * piv
    return pos, neg, n - pos - neg


def exact_sqrt(q: Fraction) -> Fraction | None:
    """Rational square root of a nonnegative rational, or ``None``."""
    from math import isqrt

    q = Fraction(q)
    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    rn, rd = isqrt(n), isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def exact_root4(q: Fraction) -> Fraction | None:
    r = exact_sqrt(q)
    return exact_sqrt(r) if r is not None else None
