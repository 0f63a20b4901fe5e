"""Exact solution of small rational linear systems.

Rows are scaled to integers and reduced with Bareiss' fraction-free
elimination, so every intermediate entry is an exact integer (a minor of the
scaled matrix) and no Fraction normalisation happens until back substitution.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from fractions import Fraction

from engine.errors import DomainError, SingularSystemError


def _integer_row(row: Sequence[Fraction | int]) -> list[int]:
    """Scale a rational row by the lcm of its denominators."""
    fractions = [Fraction(v) for v in row]
    scale = math.lcm(*(v.denominator for v in fractions)) if fractions else 1
    return [int(v * scale) for v in fractions]


def solve_exact(
    matrix: Sequence[Sequence[Fraction | int]],
    rhs: Sequence[Fraction | int],
) -> list[Fraction]:
    """Solve ``matrix · x = rhs`` exactly.

    Args:
        matrix: Square matrix of rationals, row-major.
        rhs: Right-hand side, same length as the matrix.

    Returns:
        The unique solution as Fractions.

    Raises:
        DomainError: If the shapes do not match.
        SingularSystemError: If the matrix is singular.
    """
    n = len(matrix)
    if len(rhs) != n or any(len(row) != n for row in matrix):
        raise DomainError("solve_exact needs a square matrix and a matching right-hand side")
    if n == 0:
        return []

    # augmented integer matrix
    m = [_integer_row(list(row) + [b]) for row, b in zip(matrix, rhs)]
    previous = 1
    for k in range(n):
        pivot_row = next((i for i in range(k, n) if m[i][k] != 0), None)
        if pivot_row is None:
            raise SingularSystemError(f"no pivot in column {k}")
        if pivot_row != k:
            m[k], m[pivot_row] = m[pivot_row], m[k]
        pivot = m[k][k]
        for i in range(k + 1, n):
            factor = m[i][k]
            row_i, row_k = m[i], m[k]
            for j in range(k + 1, n + 1):
                # exact division: Sylvester's identity
                row_i[j] = (row_i[j] * pivot - factor * row_k[j]) // previous
            row_i[k] = 0
        previous = pivot

    solution = [Fraction(0)] * n
    for i in range(n - 1, -1, -1):
        acc = Fraction(m[i][n])
        for j in range(i + 1, n):
            acc -= m[i][j] * solution[j]
        solution[i] = acc / m[i][i]
    return solution
