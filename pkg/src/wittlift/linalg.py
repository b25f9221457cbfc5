"""Dense exact linear algebra over a field of FFElem values.

Matrices are lists of row lists.  Echelonization always picks the leftmost
pivot in the topmost unprocessed row, so every basis this module returns is
deterministic.
"""

from __future__ import annotations

from .coeffring import ff_one, ff_zero


def mat_copy(rows):
    return [list(r) for r in rows]


def rref(rows):
    """Reduced row echelon form; returns (rref rows, pivot column list)."""
    rows = mat_copy(rows)
    if not rows:
        return rows, []
    ncols = len(rows[0])
    pivots = []
    r = 0
    for c in range(ncols):
        pr = None
        for i in range(r, len(rows)):
            if not rows[i][c].is_zero():
                pr = i
                break
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        inv = rows[r][c].inverse()
        rows[r] = [v * inv for v in rows[r]]
        for i in range(len(rows)):
            if i != r and not rows[i][c].is_zero():
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r] + rows[r:], pivots


def rank(rows):
    return len(rref(rows)[1])


def nullspace(rows, params):
    """Basis of the right kernel, echelonized (free variables in order)."""
    if not rows:
        return []
    ncols = len(rows[0])
    red, pivots = rref(rows)
    pivot_set = set(pivots)
    free = [c for c in range(ncols) if c not in pivot_set]
    basis = []
    one, zero = ff_one(params), ff_zero(params)
    for fc in free:
        vec = [zero] * ncols
        vec[fc] = one
        for i, pc in enumerate(pivots):
            vec[pc] = -red[i][fc]
        basis.append(vec)
    return basis


def solve(rows, rhs, params):
    """One solution of rows * x = rhs, or None if inconsistent."""
    if not rows:
        return []
    ncols = len(rows[0])
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    red, pivots = rref(aug)
    if ncols in pivots:
        return None
    zero = ff_zero(params)
    x = [zero] * ncols
    for i, pc in enumerate(pivots):
        x[pc] = red[i][-1]
    return x


def left_nullspace(rows, params):
    """Basis of {y : y * rows = 0}."""
    if not rows:
        return []
    transposed = [[rows[i][j] for i in range(len(rows))] for j in range(len(rows[0]))]
    return nullspace(transposed, params)


def span_contains(basis_rows, vec, params):
    return solve([[basis_rows[i][j] for i in range(len(basis_rows))]
                  for j in range(len(vec))], list(vec), params) is not None


def independent_complement(sub_rows, all_rows, params):
    """Vectors from all_rows extending a basis of span(sub_rows), reduced."""
    stack = mat_copy(sub_rows)
    base_rank = rank(stack) if stack else 0
    out = []
    for v in all_rows:
        trial = stack + [list(v)]
        r = rank(trial)
        if r > base_rank:
            stack = trial
            base_rank = r
            out.append(list(v))
    return out
