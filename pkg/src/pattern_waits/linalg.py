"""Small dense solvers: fraction-free Bareiss for rationals, LAPACK for floats."""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Sequence

import numpy as np


class SingularMatrix(ArithmeticError):
    pass


def _integer_rows(A: Sequence[Sequence[Fraction]], b: Sequence[Fraction]):
    rows, scales = [], []
    for row, rhs in zip(A, b):
        entries = [Fraction(v) for v in row] + [Fraction(rhs)]
        scale = lcm(*(e.denominator for e in entries))
        rows.append([e.numerator * (scale // e.denominator) for e in entries])
        scales.append(scale)
    return rows, scales


def bareiss_solve(A: Sequence[Sequence[Fraction]], b: Sequence[Fraction]):
    """Solve ``A x = b`` exactly.

    Each row is cleared of denominators, then eliminated with Bareiss'
    fraction-free update so every intermediate stays an integer. Returns
    ``(x, det(A))``; raises :class:`SingularMatrix` when no nonzero pivot exists.
    """
    n = len(A)
    if n == 0:
        return [], Fraction(1)
    M, scales = _integer_rows(A, b)
    sign = 1
    prev = 1
    for k in range(n):
        p = next((r for r in range(k, n) if M[r][k] != 0), None)
        if p is None:
            raise SingularMatrix(f"zero pivot in column {k}")
        if p != k:
            M[k], M[p] = M[p], M[k]
            sign = -sign
        pivot = M[k][k]
        rk = M[k]
        for i in range(k + 1, n):
            ri = M[i]
            lead = ri[k]
            for j in range(k + 1, n + 1):
                ri[j] = (pivot * ri[j] - lead * rk[j]) // prev
            ri[k] = 0
        prev = pivot
    scale_prod = 1
    for s in scales:
        scale_prod *= s
    det = Fraction(sign * M[n - 1][n - 1], scale_prod)
    x = [Fraction(0)] * n
    for i in range(n - 1, -1, -1):
        acc = Fraction(M[i][n])
        for j in range(i + 1, n):
            acc -= M[i][j] * x[j]
        x[i] = acc / M[i][i]
    return x, det


def float_solve(A, b):
    """Partial-pivoting LU solve; returns ``(x, det)`` as Python floats."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    try:
        lu_det = float(np.linalg.det(A))
        x = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrix(str(exc)) from None
    if not np.all(np.isfinite(x)) or np.linalg.cond(A) > 1e14:
        raise SingularMatrix("matrix is numerically singular")
    return [float(v) for v in x], lu_det

