"""Per-user shaping/altering LPs and the simplex that solves them."""

from .kernel import BACKEND
from .lp import LPResult, solve_lp
from .oracle import brute_force_oracle, grid_bound
from .problems import (
    B_SCOPES,
    OBJECTIVE_UNITS,
    AlteringInput,
    InfeasibleError,
    ScheduleConstraints,
    ShapingInput,
    SolverError,
    altering_cost,
    check_schedule,
    profile_constraints,
    shaping_objective,
    soc_trajectory,
    solve_altering,
    solve_schedule,
    solve_shaping,
)

__all__ = [
    "BACKEND",
    "B_SCOPES",
    "OBJECTIVE_UNITS",
    "AlteringInput",
    "InfeasibleError",
    "LPResult",
    "ScheduleConstraints",
    "ShapingInput",
    "SolverError",
    "brute_force_oracle",
    "altering_cost",
    "check_schedule",
    "grid_bound",
    "profile_constraints",
    "shaping_objective",
    "soc_trajectory",
    "solve_altering",
    "solve_lp",
    "solve_schedule",
    "solve_shaping",
]
