"""User side of the protocol: each agent keeps its PEV profile private."""

from __future__ import annotations

import numpy as np

from ..fleet import Household, PevProfile, uncoordinated_schedule
from ..solver import altering_cost, profile_constraints, solve_schedule


class UserAgent:
    def __init__(
        self,
        household: Household,
        profile: PevProfile | None,
        v2g_enabled: bool = True,
        soc_floor_fraction: float = 0.2,
        schedule=None,
    ):
        self.household = household
        self.profile = profile
        self.v2g_enabled = v2g_enabled
        self.soc_floor_fraction = soc_floor_fraction
        if schedule is None:
            schedule = uncoordinated_schedule(profile) if profile is not None else np.zeros(24)
        self.schedule = np.array(schedule, dtype=float)

    def copy(self) -> "UserAgent":
        return UserAgent(self.household, self.profile, self.v2g_enabled, self.soc_floor_fraction, self.schedule.copy())

    def report(self) -> np.ndarray:
        """Total load sent to the retailer."""
        return self.household.baseline + self.schedule

    def connected_from(self, t0: int) -> bool:
        return self.profile is not None and any(s >= t0 for s in self.profile.slots)

    def shape(self, signal, backend=None) -> np.ndarray:
        """Best response to ``signal`` = others' aggregate minus DA purchase."""
        if self.profile is None:
            return self.report()
        cost = self.household.baseline + np.asarray(signal)
        cons = profile_constraints(self.profile, self.v2g_enabled, self.soc_floor_fraction)
        self.schedule = solve_schedule(cost, cons, backend=backend)
        return self.report()

    def alter(
        self, signal, t0: int, b_sign: int, lam: float, b_scope: str = "full", unit: str = "MWh", backend=None
    ) -> np.ndarray:
        """Re-plan hours >= t0 with hours before t0 frozen at their committed values."""
        if not self.connected_from(t0):
            return self.report()
        shaping_cost = self.household.baseline + np.asarray(signal)
        cost = altering_cost(shaping_cost, t0, lam, b_sign, b_scope, unit)
        cons = profile_constraints(self.profile, self.v2g_enabled, self.soc_floor_fraction, t0, self.schedule)
        self.schedule = solve_schedule(cost, cons, backend=backend)
        return self.report()
