"""Row reduction and null spaces over either scalar domain.

Matrices are lists of rows.  With ``tol=None`` entries are compared to zero
exactly (Fractions); with a tolerance, pivots are chosen by largest modulus
and entries below ``tol * scale`` count as zero.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .numeric import div


def _is_zero(x, cutoff) -> bool:
    if cutoff is None:
        return x == 0
    return abs(x) <= cutoff


def rref(matrix: Sequence[Sequence], tol=None, columns: Sequence[int] | None = None):
    """Reduced row echelon form.

    ``columns`` gives the order in which columns are scanned for pivots
    (default left to right).  Returns ``(rows, pivots)`` where ``rows`` are
    the nonzero reduced rows and ``pivots[r]`` is the pivot column of row r.
    """
    rows, pivots, _ = _reduce(matrix, tol, columns)
    return rows, pivots


def _reduce(matrix, tol, columns):
    rows = [list(r) for r in matrix]
    if not rows:
        return [], [], []
    ncols = len(rows[0])
    order = list(range(ncols)) if columns is None else list(columns)
    cutoff = None
    if tol is not None:
        scale = max((abs(x) for r in rows for x in r), default=0)
        cutoff = tol * scale if scale else 0
    pivots: list[int] = []
    r = 0
    for c in order:
        if r == len(rows):
            break
        if cutoff is None:
            piv = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        else:
            best = max(range(r, len(rows)), key=lambda i: abs(rows[i][c]))
            piv = None if _is_zero(rows[best][c], cutoff) else best
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        p = rows[r][c]
        rows[r] = [div(x, p) for x in rows[r]]
        for i in range(len(rows)):
            if i != r:
                f = rows[i][c]
                if f != 0:
                    rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    out = rows[:r]
    if cutoff is not None:
        # clean residual noise in pivot columns and ahead of each pivot
        pos = {c: k for k, c in enumerate(order)}
        for i, c in enumerate(pivots):
            for j in range(len(out)):
                out[j][c] = out[j][c] * 0 + (1 if i == j else 0)
            for c2 in order[: pos[c]]:
                out[i][c2] = out[i][c2] * 0
    return out, pivots, rows[r:]


def rank(matrix, tol=None) -> int:
    return len(rref(matrix, tol)[1])


def nullspace(matrix: Sequence[Sequence], ncols: int | None = None, tol=None) -> list[list]:
    """Basis of ``{x : A x = 0}``, one vector per free column."""
    if not matrix:
        if ncols is None:
            raise ValueError("ncols is required for an empty matrix")
        return [[Fraction(int(i == j)) for i in range(ncols)] for j in range(ncols)]
    ncols = len(matrix[0])
    rows, pivots = rref(matrix, tol)
    zero = matrix[0][0] * 0
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        x = [zero] * ncols
        x[f] = zero + 1
        for r, c in enumerate(pivots):
            x[c] = -rows[r][f]
        basis.append(x)
    return basis


def solve(matrix: Sequence[Sequence], rhs: Sequence, tol=None) -> list | None:
    """A solution of ``A x = b`` or None when inconsistent."""
    ncols = len(matrix[0])
    aug = [list(r) + [b] for r, b in zip(matrix, rhs)]
    rows, pivots, rest = _reduce(aug, tol, range(ncols))
    cutoff = None
    if tol is not None:
        cutoff = tol * max((abs(x) for r in aug for x in r), default=0)
    if any(not _is_zero(r[-1], cutoff) for r in rest):
        return None
    zero = matrix[0][0] * 0
    x = [zero] * ncols
    for r, c in enumerate(pivots):
        x[c] = rows[r][-1]
    return x


def matmul(a, b):
    n, m, p = len(a), len(b), len(b[0])
    return [[sum((a[i][k] * b[k][j] for k in range(m)), a[i][0] * 0) for j in range(p)] for i in range(n)]
