"""Exact integer / rational linear algebra used by the relation lattices."""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Sequence


def hnf(rows: Sequence[Sequence[int]], upto: int | None = None) -> list[list[int]]:
    """Row-style Hermite normal form.

    Pivots move strictly right, are positive, and entries above a pivot are
    reduced into ``[0, pivot)``. Zero rows are dropped. With ``upto`` set, only
    the first ``upto`` columns are eliminated and *all* rows (zero-prefixed
    ones included) are returned in order; this is what ``integer_kernel``
    needs to read off the transformation.
    """
    A = [[int(x) for x in r] for r in rows]
    if not A:
        return []
    n = len(A[0])
    ncols = n if upto is None else upto
    m = len(A)
    r = 0
    for col in range(ncols):
        if r >= m:
            break
        while True:
            nz = [i for i in range(r, m) if A[i][col] != 0]
            if not nz:
                break
            piv = min(nz, key=lambda i: abs(A[i][col]))
            A[r], A[piv] = A[piv], A[r]
            clean = True
            for i in range(r + 1, m):
                if A[i][col]:
                    f = A[i][col] // A[r][col]
                    A[i] = [a - f * b for a, b in zip(A[i], A[r])]
                    if A[i][col]:
                        clean = False
            if clean:
                break
        if A[r][col] == 0:
            continue
        if A[r][col] < 0:
            A[r] = [-a for a in A[r]]
        for i in range(r):
            f = A[i][col] // A[r][col]
            if f:
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        r += 1
    if upto is not None:
        return A
    return [row for row in A if any(row)]


def clear_denominators(row: Sequence[Fraction]) -> list[int]:
    den = 1
    for x in row:
        den = lcm(den, Fraction(x).denominator)
    return [int(Fraction(x) * den) for x in row]


def integer_kernel(matrix: Sequence[Sequence[Fraction]], ncols: int) -> list[list[int]]:
    """Basis (in HNF) of ``{v in Z^ncols : matrix @ v = 0}``.

    Rational rows are scaled to integers first; that leaves the kernel intact.
    """
    B = [clear_denominators(r) for r in matrix if any(r)]
    if not B:
        return [[int(i == j) for j in range(ncols)] for i in range(ncols)]
    nrows = len(B)
    # rows of [B^T | I]; reduce the B^T block, zero-prefixed rows give the kernel
    aug = [[B[i][j] for i in range(nrows)] + [int(j == k) for k in range(ncols)]
           for j in range(ncols)]
    red = hnf(aug, upto=nrows)
    kernel = [row[nrows:] for row in red if not any(row[:nrows])]
    return hnf(kernel)


def rref(rows: Sequence[Sequence[Fraction]], col_order: Sequence[int]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over Q, pivoting in the given column order."""
    A = [[Fraction(x) for x in r] for r in rows]
    pivots: list[int] = []
    r = 0
    for col in col_order:
        piv = next((i for i in range(r, len(A)) if A[i][col] != 0), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = 1 / A[r][col]
        A[r] = [x * inv for x in A[r]]
        for i in range(len(A)):
            if i != r and A[i][col] != 0:
                f = A[i][col]
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        pivots.append(col)
        r += 1
    return A[:r], pivots


def solve_rational(columns: Sequence[Sequence[Fraction]], target: Sequence[Fraction]) -> list[Fraction] | None:
    """Some ``x`` with ``sum_i x_i * columns[i] == target``, free variables set to 0."""
    n = len(columns)
    dim = len(target)
    rows = [[Fraction(columns[i][d]) for i in range(n)] + [Fraction(target[d])] for d in range(dim)]
    red, pivots = rref(rows, range(n))
    # rref drops non-pivot rows, so consistency is checked by substitution
    x = [Fraction(0)] * n
    for row, col in zip(red, pivots):
        x[col] = row[-1]
    for d in range(dim):
        if sum(x[i] * Fraction(columns[i][d]) for i in range(n)) != Fraction(target[d]):
            return None
    return x
