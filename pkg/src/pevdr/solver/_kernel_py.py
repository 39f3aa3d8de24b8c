"""Pure numpy simplex pivot loop (fallback for the Cython kernel).

Both backends implement identical pricing and ratio rules so they walk the
same vertex path:

* entering column: most negative primary reduced cost below ``-tol1``; if
  none, the most negative secondary reduced cost below ``-tol2`` among
  columns whose primary reduced cost is within ``tol1`` of zero
  (lexicographic objective). After ``bland_after`` iterations, the lowest
  eligible index is taken instead (Bland's rule, anti-cycling).
* leaving row: minimum ratio; candidates within ``RATIO_EPS`` of the minimum
  are broken by the smallest basic-variable index.
"""

import numpy as np

OPTIMAL = 0
UNBOUNDED = 1
ITERATION_LIMIT = 2

RATIO_EPS = 1e-12


def pivot(T, basis, r, j):
    T[r] /= T[r, j]
    col = T[:, j].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])
    basis[r] = j


def _entering(T, obj_row, sec_row, n_enter, tol1, tol2, bland):
    d1 = T[obj_row, :n_enter]
    improving = d1 < -tol1
    if improving.any():
        if bland:
            return int(np.flatnonzero(improving)[0])
        return int(np.argmin(d1))
    if sec_row < 0:
        return -1
    d2 = T[sec_row, :n_enter]
    eligible = (d1 <= tol1) & (d2 < -tol2)
    if not eligible.any():
        return -1
    if bland:
        return int(np.flatnonzero(eligible)[0])
    masked = np.where(eligible, d2, np.inf)
    return int(np.argmin(masked))


def _leaving(T, basis, nrows, j, piv_tol):
    col = T[:nrows, j]
    rows = np.flatnonzero(col > piv_tol)
    if rows.size == 0:
        return -1
    ratios = T[rows, -1] / col[rows]
    best = ratios.min()
    ties = rows[ratios <= best + RATIO_EPS]
    return int(ties[np.argmin(basis[ties])])


def run_simplex(T, basis, nrows, n_enter, obj_row, sec_row, tol1, tol2, piv_tol, max_iter, bland_after):
    """Pivot ``T`` in place until optimal; returns (status, iterations)."""
    it = 0
    while it < max_iter:
        j = _entering(T, obj_row, sec_row, n_enter, tol1, tol2, it >= bland_after)
        if j < 0:
            return OPTIMAL, it
        r = _leaving(T, basis, nrows, j, piv_tol)
        if r < 0:
            return UNBOUNDED, it
        pivot(T, basis, r, j)
        it += 1
    return ITERATION_LIMIT, it
