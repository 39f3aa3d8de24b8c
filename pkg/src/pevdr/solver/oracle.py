"""Exhaustive grid search over small schedules, used to check the simplex."""

from __future__ import annotations

import itertools

import numpy as np

from ..prices import HOURS
from .problems import CONSTRAINT_TOL, InfeasibleError, ScheduleConstraints

MAX_FREE_SLOTS = 5
MIN_GRID_STEP = 0.1


def _grid(lower: float, upper: float, step: float) -> np.ndarray:
    k_lo = int(np.ceil(lower / step - 1e-9))
    k_hi = int(np.floor(upper / step + 1e-9))
    return np.arange(k_lo, k_hi + 1) * step


def brute_force_oracle(objective, cons: ScheduleConstraints, grid_step: float = 0.1):
    """Best schedule among grid points, returned as ``(schedule, value)``.

    Every free hour but the last takes values on multiples of ``grid_step``;
    the last one absorbs the remaining energy exactly. Raises
    ``InfeasibleError`` when no enumerated point is feasible.
    """
    free = cons.free
    if len(free) > MAX_FREE_SLOTS:
        raise ValueError(f"oracle limited to {MAX_FREE_SLOTS} free hours, got {len(free)}")
    if grid_step < MIN_GRID_STEP:
        raise ValueError(f"grid_step must be >= {MIN_GRID_STEP}")
    c = np.asarray(objective, dtype=float)
    base = np.zeros(HOURS)
    for s in cons.frozen:
        base[s - 1] = cons.committed[s - 1]
    remaining = cons.energy - sum(base[s - 1] for s in cons.order)

    if not free:
        candidates = np.zeros((1, 0))
    else:
        grid = _grid(cons.lower, cons.upper, grid_step)
        if len(free) == 1:
            head = np.zeros((1, 0))
        else:
            head = np.array(list(itertools.product(grid, repeat=len(free) - 1)))
        last = remaining - head.sum(axis=1)
        candidates = np.column_stack([head, last])
    ok = np.ones(len(candidates), dtype=bool)
    if free:
        ok &= (candidates[:, -1] >= cons.lower - CONSTRAINT_TOL) & (candidates[:, -1] <= cons.upper + CONSTRAINT_TOL)
    elif abs(remaining) > CONSTRAINT_TOL:
        ok[:] = False

    # Walk the battery order directly.
    column = {s: k for k, s in enumerate(free)}
    level = np.full(len(candidates), cons.soc_start)
    for s in cons.order:
        level = level + (candidates[:, column[s]] if s in column else base[s - 1])
        ok &= (level >= cons.soc_floor - CONSTRAINT_TOL) & (level <= cons.capacity + CONSTRAINT_TOL)
    if not ok.any():
        raise InfeasibleError("grid", "no enumerated schedule satisfies the constraints")
    feasible = candidates[ok]
    values = feasible @ c[np.array(free, dtype=int) - 1] if free else np.zeros(1)
    values = values + float(base @ c)
    best = int(np.argmin(values))
    schedule = base.copy()
    for k, s in enumerate(free):
        schedule[s - 1] = feasible[best, k]
    return schedule, float(values[best])


def grid_bound(objective, grid_step: float) -> float:
    """Worst-case objective gap caused by restricting to the grid."""
    return grid_step * float(np.sum(np.abs(objective)))
