"""Per-user shaping and altering LPs over a PEV's 24-slot schedule.

A schedule is a plain length-24 float array (kWh per one-hour slot, index 0
is hour 1); positive entries charge, negative entries discharge to the grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..fleet import PevProfile, permissible_slots
from ..prices import HOURS
from .lp import INFEASIBLE, OPTIMAL, solve_lp

CONSTRAINT_TOL = 1e-9

B_SCOPES = ("full", "instantaneous")
# Scale applied to the tracking term of the altering objective, per unit in
# which its inner product is measured. The draw-at-t0 term stays in kWh.
OBJECTIVE_UNITS = {"MWh": 1e-3, "kWh": 1.0}


class InfeasibleError(ValueError):
    """No schedule satisfies the constraints; ``constraint`` names the culprit."""

    def __init__(self, constraint: str, detail: str = ""):
        self.constraint = constraint
        super().__init__(f"infeasible ({constraint}){': ' + detail if detail else ''}")


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class ScheduleConstraints:
    """Everything a schedule must satisfy, independent of the objective.

    ``order`` lists the connected hours in battery order; ``frozen`` holds the
    hours whose value is fixed to ``committed``.
    """

    order: tuple[int, ...]
    lower: float
    upper: float
    energy: float
    soc_start: float
    soc_floor: float
    capacity: float
    committed: np.ndarray = field(default_factory=lambda: np.zeros(HOURS))
    frozen: frozenset = frozenset()

    @property
    def free(self) -> tuple[int, ...]:
        return tuple(s for s in self.order if s not in self.frozen)

    @property
    def frozen_energy(self) -> float:
        return float(sum(self.committed[s - 1] for s in self.order if s in self.frozen))


def profile_constraints(
    profile: PevProfile,
    v2g_enabled: bool = True,
    soc_floor_fraction: float = 0.2,
    t0: int = 1,
    committed=None,
) -> ScheduleConstraints:
    """Constraints for ``profile`` with every connected hour before ``t0`` frozen."""
    order = permissible_slots(profile)
    frozen = frozenset(s for s in order if s < t0)
    base = np.zeros(HOURS)
    if committed is not None:
        committed = np.asarray(committed, dtype=float)
        base[: min(len(committed), t0 - 1)] = committed[: t0 - 1]
    base.setflags(write=False)
    return ScheduleConstraints(
        order=order,
        lower=-profile.power_limit if v2g_enabled else 0.0,
        upper=profile.power_limit,
        energy=profile.energy_need,
        soc_start=profile.soc_at_arrival,
        soc_floor=soc_floor_fraction * profile.capacity,
        capacity=profile.capacity,
        committed=base,
        frozen=frozen,
    )


def soc_trajectory(schedule, cons: ScheduleConstraints) -> np.ndarray:
    """State of charge after each connected hour, in battery order."""
    x = np.asarray(schedule, dtype=float)
    return cons.soc_start + np.cumsum([x[s - 1] for s in cons.order])


def check_schedule(schedule, cons: ScheduleConstraints, tol: float = CONSTRAINT_TOL) -> list[str]:
    """Return a list of violated invariants (empty when the schedule is valid)."""
    x = np.asarray(schedule, dtype=float)
    problems = []
    if x.shape != (HOURS,) or not np.all(np.isfinite(x)):
        return ["shape: schedule must be 24 finite values"]
    window = set(cons.order)
    outside = [h for h in range(1, HOURS + 1) if h not in window and x[h - 1] != 0.0]
    if outside:
        problems.append(f"window: nonzero outside connection at hours {outside}")
    for s in cons.order:
        if x[s - 1] > cons.upper + tol or x[s - 1] < cons.lower - tol:
            problems.append(f"power: hour {s} value {x[s - 1]:.6g} outside [{cons.lower}, {cons.upper}]")
    total = float(np.sum([x[s - 1] for s in cons.order]))
    if abs(total - cons.energy) > tol:
        problems.append(f"energy: delivered {total:.12g} != need {cons.energy:.12g}")
    soc = soc_trajectory(x, cons)
    for s, level in zip(cons.order, soc):
        if level < cons.soc_floor - tol:
            problems.append(f"soc_floor: {level:.6g} below {cons.soc_floor:.6g} after hour {s}")
        if level > cons.capacity + tol:
            problems.append(f"soc_ceiling: {level:.6g} above {cons.capacity:.6g} after hour {s}")
    for s in cons.frozen:
        if x[s - 1] != cons.committed[s - 1]:
            problems.append(f"prefix: hour {s} changed from committed {cons.committed[s - 1]!r}")
    return problems


def _compile(cons: ScheduleConstraints, skip_floor=False, skip_ceiling=False):
    """LP rows over the free hours; returns (free, A_ub, b_ub, energy_rhs) or raises."""
    free = cons.free
    index = {s: k for k, s in enumerate(free)}
    n = len(free)
    rows, rhs = [], []
    const = cons.soc_start
    coeffs = np.zeros(n)
    # One floor/ceiling row per distinct free prefix; frozen hours only move the constant.
    groups: dict[int, list[float]] = {}
    for s in cons.order:
        if s in cons.frozen:
            const += cons.committed[s - 1]
        else:
            coeffs[index[s]] = 1.0
        k = int(coeffs.sum())
        lo, hi = groups.get(k, [np.inf, -np.inf])
        groups[k] = [min(lo, const), max(hi, const)]
    for k, (lo_const, hi_const) in groups.items():
        if k == 0:
            if not skip_floor and lo_const < cons.soc_floor - CONSTRAINT_TOL:
                raise InfeasibleError("soc_floor", "committed hours already breach the SOC floor")
            if not skip_ceiling and hi_const > cons.capacity + CONSTRAINT_TOL:
                raise InfeasibleError("soc_ceiling", "committed hours already exceed capacity")
            continue
        a = np.zeros(n)
        a[:k] = 1.0
        if not skip_ceiling and hi_const + k * cons.upper > cons.capacity:
            rows.append(a)
            rhs.append(cons.capacity - hi_const)
        if not skip_floor and lo_const + k * cons.lower < cons.soc_floor:
            rows.append(-a)
            rhs.append(lo_const - cons.soc_floor)
    energy_rhs = cons.energy - cons.frozen_energy
    A_ub = np.array(rows).reshape(-1, n)
    return free, A_ub, np.array(rhs), energy_rhs


def _diagnose(cons: ScheduleConstraints) -> InfeasibleError:
    n = len(cons.free)
    need = cons.energy - cons.frozen_energy
    if need > n * cons.upper + CONSTRAINT_TOL or need < n * cons.lower - CONSTRAINT_TOL:
        return InfeasibleError(
            "energy_balance", f"{need:.6g} kWh cannot be delivered over {n} free hours"
        )
    for name, kwargs in (("soc_floor", {"skip_floor": True}), ("soc_ceiling", {"skip_ceiling": True})):
        try:
            free, A_ub, b_ub, e = _compile(cons, **kwargs)
        except InfeasibleError:
            continue
        res = solve_lp(np.zeros(n), A_ub, b_ub, np.ones((1, n)), [e], np.full(n, cons.lower), np.full(n, cons.upper))
        if res.status == OPTIMAL:
            return InfeasibleError(name, "SOC bound unreachable with the available power")
    return InfeasibleError("soc_bounds", "SOC floor and ceiling cannot both be met")


def solve_schedule(cost, cons: ScheduleConstraints, backend: str | None = None) -> np.ndarray:
    """Minimize ``cost @ schedule`` over schedules satisfying ``cons``.

    Ties are broken toward energy in earlier connected hours.
    """
    cost = np.asarray(cost, dtype=float)
    x = np.where([h in cons.frozen for h in range(1, HOURS + 1)], cons.committed, 0.0)
    free, A_ub, b_ub, energy_rhs = _compile(cons)
    n = len(free)
    if n == 0:
        if abs(energy_rhs) > CONSTRAINT_TOL:
            raise InfeasibleError("energy_balance", "no free hours left to deliver the remaining need")
        return x
    idx = np.array(free) - 1
    res = solve_lp(
        cost[idx],
        A_ub,
        b_ub,
        np.ones((1, n)),
        [energy_rhs],
        np.full(n, cons.lower),
        np.full(n, cons.upper),
        secondary=np.arange(1, n + 1, dtype=float),
        backend=backend,
    )
    if res.status == INFEASIBLE:
        raise _diagnose(cons)
    if res.status != OPTIMAL:
        raise SolverError(f"simplex ended with status {res.status}")
    values = np.clip(res.x, cons.lower, cons.upper)
    values[np.abs(values) < 1e-13] = 0.0
    x[idx] = values
    violations = check_schedule(x, cons)
    if violations:
        raise SolverError("post-solve verification failed: " + "; ".join(violations))
    return x


@dataclass(frozen=True)
class ShapingInput:
    target_da: np.ndarray
    others_aggregate: np.ndarray
    own_baseline: np.ndarray
    profile: PevProfile
    v2g_enabled: bool = True
    soc_floor_fraction: float = 0.2

    def __post_init__(self):
        for name in ("target_da", "others_aggregate", "own_baseline"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != (HOURS,) or not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} must be 24 finite values")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def cost(self) -> np.ndarray:
        """Coefficients of the shaping correlation: own baseline + others - DA target."""
        return self.own_baseline + self.others_aggregate - self.target_da

    def constraints(self, t0: int = 1, committed=None) -> ScheduleConstraints:
        return profile_constraints(self.profile, self.v2g_enabled, self.soc_floor_fraction, t0, committed)


@dataclass(frozen=True)
class AlteringInput:
    shaping: ShapingInput
    t0: int
    committed: np.ndarray
    lam: float
    b_sign: int
    b_scope: str = "full"
    unit: str = "MWh"

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lambda must lie in [0, 1], got {self.lam}")
        if self.b_sign not in (-1, 1):
            raise ValueError(f"b_sign must be -1 or +1, got {self.b_sign}")
        if self.b_scope not in B_SCOPES:
            raise ValueError(f"b_scope must be one of {B_SCOPES}")
        if self.unit not in OBJECTIVE_UNITS:
            raise ValueError(f"unit must be one of {tuple(OBJECTIVE_UNITS)}")
        if not 1 <= self.t0 <= HOURS:
            raise ValueError(f"t0 must be in 1..24, got {self.t0}")
        committed = np.zeros(HOURS)
        given = np.asarray(self.committed, dtype=float)
        committed[: min(len(given), self.t0 - 1)] = given[: self.t0 - 1]
        committed.setflags(write=False)
        object.__setattr__(self, "committed", committed)

    def constraints(self) -> ScheduleConstraints:
        return self.shaping.constraints(self.t0, self.committed)

    @property
    def soc_before_t0(self) -> float:
        """Battery level just before ``t0`` along the connection order."""
        cons = self.constraints()
        level = cons.soc_start
        for s in cons.order:
            if s >= self.t0:
                break
            level += self.committed[s - 1]
        return level

    @property
    def cost(self) -> np.ndarray:
        """Linear coefficients of the altering objective on the PEV schedule."""
        return altering_cost(self.shaping.cost, self.t0, self.lam, self.b_sign, self.b_scope, self.unit)

    def objective(self, schedule) -> float:
        """Full altering objective value, constant terms included."""
        t = self.t0 - 1
        s = self.shaping
        inst = s.others_aggregate[t] + s.own_baseline[t] + schedule[t]
        corr = float(np.dot(schedule, s.cost)) * OBJECTIVE_UNITS[self.unit]
        if self.b_scope == "full":
            return self.b_sign * (self.lam * corr + (1.0 - self.lam) * inst)
        return self.lam * corr + self.b_sign * (1.0 - self.lam) * inst


def altering_cost(
    shaping_cost, t0: int, lam: float, b_sign: int, b_scope: str = "full", unit: str = "MWh"
) -> np.ndarray:
    """Per-hour coefficients of the altering objective.

    ``full`` applies the sign to the whole weighted sum; ``instantaneous``
    flips only the draw-at-t0 term and keeps tracking the DA purchase.
    With ``unit="MWh"`` the tracking inner product is taken in MWh*MWh and
    the whole objective is rescaled by 1000, so the draw at t0 stays in kWh.
    """
    if unit not in OBJECTIVE_UNITS:
        raise ValueError(f"unit must be one of {tuple(OBJECTIVE_UNITS)}")
    pick = np.zeros(HOURS)
    pick[t0 - 1] = 1.0
    shaping = lam * OBJECTIVE_UNITS[unit] * np.asarray(shaping_cost, dtype=float)
    if b_scope == "full":
        return b_sign * (shaping + (1.0 - lam) * pick)
    if b_scope == "instantaneous":
        return shaping + b_sign * (1.0 - lam) * pick
    raise ValueError(f"b_scope must be one of {B_SCOPES}")


def shaping_objective(schedule, inp: ShapingInput) -> float:
    return float(np.dot(schedule, inp.cost))


def solve_shaping(inp: ShapingInput, backend: str | None = None) -> np.ndarray:
    """Schedule minimizing correlation with (own baseline + others - DA target)."""
    return solve_schedule(inp.cost, inp.constraints(), backend=backend)


def solve_altering(inp: AlteringInput, backend: str | None = None) -> np.ndarray:
    """Re-plan hours >= t0 given the committed prefix, trading tracking against draw at t0."""
    return solve_schedule(inp.cost, inp.constraints(), backend=backend)
