"""Dense LU with partial pivoting for the small collocation systems.

Written over plain Python lists so the same code runs on floats and on
``mpmath.mpf`` scalars (the high-precision path used for truncation-error
evaluation at tiny step sizes).
"""

from __future__ import annotations

from typing import Sequence


class SingularMatrix(ArithmeticError):
    pass


def lu_factor(A: Sequence[Sequence]):
    """Return ``(LU, perm)``; ``LU`` packs unit-lower L and U in one matrix."""
    n = len(A)
    LU = [list(row) for row in A]
    perm = list(range(n))
    for k in range(n):
        p = max(range(k, n), key=lambda r: abs(LU[r][k]))
        if LU[p][k] == 0:
            raise SingularMatrix(f"zero pivot in column {k}")
        if p != k:
            LU[k], LU[p] = LU[p], LU[k]
            perm[k], perm[p] = perm[p], perm[k]
        piv = LU[k][k]
        for r in range(k + 1, n):
            f = LU[r][k] / piv
            LU[r][k] = f
            if f:
                rk, rr = LU[k], LU[r]
                for c in range(k + 1, n):
                    rr[c] -= f * rk[c]
    return LU, perm


def lu_solve(LU, perm, b: Sequence) -> list:
    n = len(LU)
    y = [b[perm[i]] for i in range(n)]
    for i in range(n):
        row = LU[i]
        acc = y[i]
        for j in range(i):
            acc -= row[j] * y[j]
        y[i] = acc
    for i in reversed(range(n)):
        row = LU[i]
        acc = y[i]
        for j in range(i + 1, n):
            acc -= row[j] * y[j]
        y[i] = acc / row[i]
    return y


def matvec(A, x) -> list:
    return [sum((a * b for a, b in zip(row, x)), 0 * x[0]) for row in A]


def solve(A, b, refine: int = 1):
    """Solve ``A x = b``; ``refine`` steps of residual correction follow."""
    LU, perm = lu_factor(A)
    x = lu_solve(LU, perm, b)
    for _ in range(refine):
        r = [bi - ai for bi, ai in zip(b, matvec(A, x))]
        dx = lu_solve(LU, perm, r)
        x = [xi + di for xi, di in zip(x, dx)]
    return x, (LU, perm)


def cond1(A, factor=None) -> float:
    """1-norm condition number, from the explicit inverse (n is tiny)."""
    n = len(A)
    LU, perm = factor if factor is not None else lu_factor(A)
    norm_a = max(sum(abs(A[i][j]) for i in range(n)) for j in range(n))
    cols = []
    for j in range(n):
        e = [0 * A[0][0]] * n
        e[j] = e[j] + 1
        cols.append(lu_solve(LU, perm, e))
    norm_inv = max(sum(abs(c) for c in col) for col in cols)
    return float(norm_a * norm_inv)
