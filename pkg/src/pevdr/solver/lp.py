"""Small dense two-phase simplex for box-bounded LPs.

Solves::

    minimize    c @ x          (then secondary @ x among primary optima)
    subject to  A_ub @ x <= b_ub
                A_eq @ x == b_eq
                lb <= x <= ub

with finite bounds. Variables are shifted to ``y = x - lb >= 0`` and the upper
bounds become explicit rows; the pivot loop itself lives in ``kernel``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernel

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration_limit"

PIVOT_TOL = 1e-9
COST_TOL = 1e-9
FEAS_TOL = 1e-9

_STATUS = {0: OPTIMAL, 1: UNBOUNDED, 2: ITERATION_LIMIT}


@dataclass
class LPResult:
    status: str
    x: np.ndarray | None
    objective: float | None
    iterations: int


def _empty(n):
    return np.zeros((0, n)), np.zeros(0)


def solve_lp(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, lb=None, ub=None, secondary=None, backend=None) -> LPResult:
    c = np.asarray(c, dtype=float)
    n = c.shape[0]
    run_simplex, pivot = kernel.run_simplex, kernel.pivot
    if backend is not None:
        mod = kernel.BACKENDS[backend]
        run_simplex, pivot = mod.run_simplex, mod.pivot
    A_ub, b_ub = (_empty(n) if A_ub is None else (np.asarray(A_ub, float).reshape(-1, n), np.asarray(b_ub, float)))
    A_eq, b_eq = (_empty(n) if A_eq is None else (np.asarray(A_eq, float).reshape(-1, n), np.asarray(b_eq, float)))
    lb = np.zeros(n) if lb is None else np.asarray(lb, dtype=float)
    ub = np.full(n, np.inf) if ub is None else np.asarray(ub, dtype=float)
    if not np.all(np.isfinite(lb)):
        raise ValueError("lower bounds must be finite")
    if np.any(ub < lb):
        return LPResult(INFEASIBLE, None, None, 0)
    w = np.zeros(n) if secondary is None else np.asarray(secondary, dtype=float)

    # Shift to y >= 0 and append a row for every finite upper bound.
    capped = np.flatnonzero(np.isfinite(ub))
    G = np.vstack([A_ub, np.eye(n)[capped]])
    h = np.concatenate([b_ub - A_ub @ lb, ub[capped] - lb[capped]])
    beq = b_eq - A_eq @ lb
    n_ineq, n_eq = G.shape[0], A_eq.shape[0]

    neg = h < 0
    eq_neg = beq < 0
    n_art = int(neg.sum()) + n_eq
    m = n_ineq + n_eq
    n_enter = n + n_ineq
    ncols = n_enter + n_art + 1
    obj, sec, p1 = m, m + 1, m + 2

    T = np.zeros((m + 3, ncols))
    basis = np.empty(m, dtype=np.int64)
    sign = np.where(neg, -1.0, 1.0)
    T[:n_ineq, :n] = G * sign[:, None]
    T[:n_ineq, n : n + n_ineq] = np.diag(sign)
    T[:n_ineq, -1] = h * sign
    esign = np.where(eq_neg, -1.0, 1.0)
    T[n_ineq:m, :n] = A_eq * esign[:, None]
    T[n_ineq:m, -1] = beq * esign

    art = n_enter
    art_rows = []
    for i in range(m):
        if i >= n_ineq or neg[i]:
            T[i, art] = 1.0
            basis[i] = art
            art_rows.append(i)
            art += 1
        else:
            basis[i] = n + i
    T[obj, :n] = c
    T[sec, :n] = w
    T[p1, n_enter : n_enter + n_art] = 1.0
    for i in art_rows:
        T[p1] -= T[i]

    tol1 = COST_TOL * max(1.0, float(np.abs(c).max(initial=0.0)))
    tol2 = COST_TOL * max(1.0, float(np.abs(w).max(initial=0.0)))
    max_iter = 50 * (m + ncols)
    bland_after = 5 * (m + n)
    iterations = 0

    if art_rows:
        status, it = run_simplex(T, basis, m, n_enter, p1, -1, PIVOT_TOL, 0.0, PIVOT_TOL, max_iter, bland_after)
        iterations += it
        if status != 0:
            return LPResult(_STATUS[status], None, None, iterations)
        scale = max(1.0, float(np.abs(T[:m, -1]).max(initial=0.0)))
        if -T[p1, -1] > FEAS_TOL * scale:
            return LPResult(INFEASIBLE, None, None, iterations)
        for i in range(m):
            if basis[i] >= n_enter:
                candidates = np.flatnonzero(np.abs(T[i, :n_enter]) > PIVOT_TOL)
                if candidates.size:
                    pivot(T, basis, i, int(candidates[0]))
                    iterations += 1

    status, it = run_simplex(T, basis, m, n_enter, obj, sec, tol1, tol2, PIVOT_TOL, max_iter, bland_after)
    iterations += it
    if status != 0:
        return LPResult(_STATUS[status], None, None, iterations)
    y = np.zeros(n)
    for i in range(m):
        if basis[i] < n:
            y[basis[i]] = T[i, -1]
    x = lb + y
    return LPResult(OPTIMAL, x, float(c @ x), iterations)
