"""Scenario-level runs: one day or a horizon, with the four-way cost table."""

from __future__ import annotations

from decimal import Decimal
from typing import Callable

from .coordinator import DayResult, HorizonReport, run_day, run_horizon
from .ledger import CostReport, settle_day
from .prices import DayPrices, hourly_std
from .scenario import Scenario, ScenarioError


def scenario_day(scenario: Scenario, backend: str | None = None, day: int | None = None) -> DayResult:
    """Run the scenario's selected day (or ``day``)."""
    da, rt = scenario.prices()
    day = scenario.day if day is None else day
    if not 1 <= day <= da.days:
        raise ScenarioError(f"day {day} outside the price data (1..{da.days})")
    if da.days != rt.days:
        raise ScenarioError(f"DA has {da.days} days but RT has {rt.days}")
    return run_day(
        scenario.users_for_day(day),
        DayPrices.from_matrices(da, rt, day),
        hourly_std(rt),
        scenario.day_config(),
        clearing_seed=[scenario.clearing_seed, day],
        backend=backend,
    )


def four_way_report(scenario: Scenario, backend: str | None = None) -> CostReport:
    """Ideal, uncoordinated, shaping-only and shaping+altering costs for one day.

    All four arms share the fleet, the DA purchase and the prices. Without
    PEVs the two coordinated columns are not applicable.
    """
    return scenario_day(scenario, backend).report


def stranded_surplus_cost(result: DayResult) -> Decimal:
    """Uncoordinated cost when surplus cannot be sold back (for comparison)."""
    led = result.ledgers["real_uncoordinated"]
    return settle_day(led.da_purchase, led.realized_demand, led.da_prices, led.rt_prices, False).total_cost


def scenario_horizon(
    scenario: Scenario,
    backend: str | None = None,
    progress: Callable[[int, DayResult], None] | None = None,
) -> HorizonReport:
    da, rt = scenario.prices()
    if da.days != rt.days:
        raise ScenarioError(f"DA has {da.days} days but RT has {rt.days}")
    return run_horizon(
        scenario.users_for_day,
        da,
        rt,
        scenario.day_config(),
        days=scenario.horizon_days(da.days),
        clearing_seed=scenario.clearing_seed,
        backend=backend,
        progress=progress,
    )
