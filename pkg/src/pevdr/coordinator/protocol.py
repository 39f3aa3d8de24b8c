"""Offline shaping sweeps, online altering per hour, and day/horizon drivers."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..fleet import FleetUser, Household, PevProfile
from ..ledger import CostReport, DayLedger, ideal_cost, settle_day, sum_reports
from ..prices import HOURS, DayPrices, HourlyStd, PriceMatrix, ThresholdConfig, clear_da_demand, hourly_std
from ..solver import B_SCOPES, OBJECTIVE_UNITS, InfeasibleError
from .retailer import AGGREGATE_TOL, Retailer, decide_altering, sweep_mse, tracking_potential
from .users import UserAgent

log = logging.getLogger(__name__)

SWEEP_MODES = ("gauss-seidel", "jacobi")


class UserInfeasibleError(InfeasibleError):
    def __init__(self, user: int, cause: InfeasibleError):
        self.user = user
        self.cause = cause
        ValueError.__init__(self, f"user {user}: {cause}")
        self.constraint = cause.constraint


class HorizonError(RuntimeError):
    def __init__(self, day: int, cause: Exception):
        self.day = day
        self.cause = cause
        super().__init__(f"day {day}: {cause}")


@dataclass(frozen=True)
class ConvergenceConfig:
    max_sweeps: int = 5
    mse_tolerance: float = 1e-6
    sweep_mode: str = "gauss-seidel"

    def __post_init__(self):
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be >= 1")
        if not self.mse_tolerance > 0:
            raise ValueError("mse_tolerance must be > 0")
        if self.sweep_mode not in SWEEP_MODES:
            raise ValueError(f"sweep_mode must be one of {SWEEP_MODES}")


@dataclass
class SweepLog:
    mode: str
    mse: list[float] = field(default_factory=list)
    potentials: list[float] = field(default_factory=list)
    converged: bool = False


@dataclass(frozen=True)
class OnlineEvent:
    t0: int
    rt_price: float
    gamma: float
    b_sign: int | None
    sweeps_run: int
    load_before: float = 0.0
    load_after: float = 0.0
    mse: tuple[float, ...] = ()
    skipped_users: tuple[int, ...] = ()


class FleetState:
    """User agents plus the retailer's view of their reported loads."""

    def __init__(self, agents: list[UserAgent], target_da=None):
        self.agents = agents
        target = np.zeros(HOURS) if target_da is None else target_da
        self.retailer = Retailer([a.report() for a in agents], target)

    @classmethod
    def initial(cls, users: Sequence[FleetUser], v2g_enabled=True, soc_floor_fraction=0.2, target_da=None):
        """Every PEV starts from plug-and-charge."""
        agents = [UserAgent(h, p, v2g_enabled, soc_floor_fraction) for h, p in users]
        return cls(agents, target_da)

    def copy(self) -> "FleetState":
        new = FleetState.__new__(FleetState)
        new.agents = [a.copy() for a in self.agents]
        new.retailer = self.retailer.copy()
        return new

    @property
    def users(self) -> list[tuple[Household, PevProfile | None, np.ndarray]]:
        return [(a.household, a.profile, a.schedule) for a in self.agents]

    @property
    def aggregate(self) -> np.ndarray:
        return self.retailer.aggregate.copy()

    @property
    def target(self) -> np.ndarray:
        return self.retailer.target.copy()

    def retarget(self, target_da) -> None:
        self.retailer.target = np.array(target_da, dtype=float)


UpdateHook = Callable[[int, FleetState], None]


def _sweeps(state: FleetState, respond, cfg: ConvergenceConfig, on_update: UpdateHook | None, skip_infeasible: bool):
    """Run sweeps of ``respond(n, signal)`` until the aggregate settles."""
    retailer = state.retailer
    trace = SweepLog(cfg.sweep_mode, potentials=[tracking_potential(retailer.aggregate, retailer.target)])
    skipped = set()
    previous = retailer.aggregate.copy()
    for _ in range(cfg.max_sweeps):
        if cfg.sweep_mode == "jacobi":
            signals = [retailer.signal(n) for n in range(len(state.agents))]
            loads = []
            for n, sig in enumerate(signals):
                loads.append(_respond(state, respond, n, sig, skip_infeasible, skipped))
            for n, load in enumerate(loads):
                retailer.update(n, load)
                trace.potentials.append(tracking_potential(retailer.aggregate, retailer.target))
                if on_update:
                    on_update(n, state)
        else:
            for n in range(len(state.agents)):
                load = _respond(state, respond, n, retailer.signal(n), skip_infeasible, skipped)
                retailer.update(n, load)
                trace.potentials.append(tracking_potential(retailer.aggregate, retailer.target))
                if on_update:
                    on_update(n, state)
        current = retailer.aggregate.copy()
        trace.mse.append(sweep_mse(previous, current))
        previous = current
        if trace.mse[-1] < cfg.mse_tolerance:
            trace.converged = True
            break
    drift = retailer.drift()
    if drift > AGGREGATE_TOL:
        log.warning("aggregate cache drifted by %.3g kWh; resyncing", drift)
    retailer.resync()
    return trace, tuple(sorted(skipped))


def _respond(state, respond, n, signal, skip_infeasible, skipped):
    agent = state.agents[n]
    try:
        return respond(agent, signal)
    except InfeasibleError as exc:
        if not skip_infeasible:
            raise UserInfeasibleError(n, exc) from exc
        log.warning("user %d kept its previous schedule: %s", n, exc)
        skipped.add(n)
        return agent.report()


def offline_shape(
    fleet: FleetState,
    target_da,
    cfg: ConvergenceConfig = ConvergenceConfig(),
    backend: str | None = None,
    on_update: UpdateHook | None = None,
) -> tuple[FleetState, SweepLog]:
    """Best-response sweeps of the shaping LP against the DA purchase."""
    state = fleet.copy()
    state.retarget(target_da)
    trace, _ = _sweeps(state, lambda agent, sig: agent.shape(sig, backend), cfg, on_update, skip_infeasible=False)
    return state, trace


def online_step(
    fleet: FleetState,
    day: DayPrices,
    sigma: HourlyStd,
    threshold_cfg: ThresholdConfig,
    t0: int,
    lam: float,
    cfg: ConvergenceConfig = ConvergenceConfig(),
    b_scope: str = "full",
    backend: str | None = None,
    on_update: UpdateHook | None = None,
    unit: str = "MWh",
) -> tuple[FleetState, OnlineEvent]:
    """Compare the RT price at ``t0`` with the threshold and, if triggered, alter.

    ``lam == 1`` puts all weight on tracking the DA purchase, which is what
    shaping already did, so a trigger is logged but no sweep runs.
    """
    if b_scope not in B_SCOPES:
        raise ValueError(f"b_scope must be one of {B_SCOPES}")
    if unit not in OBJECTIVE_UNITS:
        raise ValueError(f"unit must be one of {tuple(OBJECTIVE_UNITS)}")
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must lie in [0, 1]")
    gamma, b_sign = decide_altering(day, sigma, threshold_cfg, t0)
    rt_price = float(day.rt[t0 - 1])
    before = float(fleet.retailer.aggregate[t0 - 1])
    if b_sign is None or lam == 1.0:
        return fleet, OnlineEvent(t0, rt_price, gamma, b_sign, 0, before, before)
    state = fleet.copy()

    def respond(agent, sig):
        return agent.alter(sig, t0, b_sign, lam, b_scope, unit, backend)

    trace, skipped = _sweeps(state, respond, cfg, on_update, skip_infeasible=True)
    after = float(state.retailer.aggregate[t0 - 1])
    return state, OnlineEvent(t0, rt_price, gamma, b_sign, len(trace.mse), before, after, tuple(trace.mse), skipped)


@dataclass(frozen=True)
class DayConfig:
    lam: float = 0.5
    threshold: ThresholdConfig = ThresholdConfig()
    b_scope: str = "full"
    objective_unit: str = "MWh"
    convergence: ConvergenceConfig = ConvergenceConfig()
    v2g_enabled: bool = True
    soc_floor_fraction: float = 0.2
    sellback: bool = True

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("lambda must lie in [0, 1]")
        if self.b_scope not in B_SCOPES:
            raise ValueError(f"b_scope must be one of {B_SCOPES}")
        if self.objective_unit not in OBJECTIVE_UNITS:
            raise ValueError(f"objective_unit must be one of {tuple(OBJECTIVE_UNITS)}")


@dataclass
class DayResult:
    target_da: np.ndarray
    uncoordinated: np.ndarray
    after_p1: np.ndarray | None
    after_p2: np.ndarray | None
    ledgers: dict[str, DayLedger]
    report: CostReport
    events: list[OnlineEvent]
    sweep_log: SweepLog | None

    @property
    def ledger(self) -> DayLedger:
        """Ledger of the full shaping + altering run (or of the only arm without PEVs)."""
        return self.ledgers.get("after_p2", self.ledgers["real_uncoordinated"])


def run_day(
    users: Sequence[FleetUser] | Sequence[tuple[Household, None]],
    day: DayPrices,
    sigma: HourlyStd,
    cfg: DayConfig = DayConfig(),
    clearing_seed=0,
    backend: str | None = None,
) -> DayResult:
    """Shape offline once, then step through hours 1..24 online.

    The DA purchase is the plug-and-charge aggregate passed through the
    randomized clearing model. All four cost columns share that purchase.
    """
    fleet = FleetState.initial(users, cfg.v2g_enabled, cfg.soc_floor_fraction)
    uncoordinated = fleet.aggregate
    target = clear_da_demand(uncoordinated, clearing_seed)
    fleet.retarget(target)

    def settle(demand):
        return settle_day(target, demand, day.da, day.rt, cfg.sellback)

    ledgers = {"real_uncoordinated": settle(uncoordinated)}
    ideal = ideal_cost(uncoordinated, day.da)
    has_pev = any(a.profile is not None for a in fleet.agents)
    if not has_pev:
        report = CostReport(ideal, ledgers["real_uncoordinated"].total_cost, None, None)
        return DayResult(target, uncoordinated, None, None, ledgers, report, [], None)

    state, sweep_log = offline_shape(fleet, target, cfg.convergence, backend)
    after_p1 = state.aggregate
    events = []
    for t0 in range(1, HOURS + 1):
        state, event = online_step(
            state, day, sigma, cfg.threshold, t0, cfg.lam, cfg.convergence, cfg.b_scope, backend,
            unit=cfg.objective_unit,
        )
        events.append(event)
    after_p2 = state.aggregate
    ledgers["after_p1"] = settle(after_p1)
    ledgers["after_p2"] = settle(after_p2)
    report = CostReport(
        ideal,
        ledgers["real_uncoordinated"].total_cost,
        ledgers["after_p1"].total_cost,
        ledgers["after_p2"].total_cost,
    )
    return DayResult(target, uncoordinated, after_p1, after_p2, ledgers, report, events, sweep_log)


@dataclass
class HorizonReport:
    days: list[int]
    daily: list[CostReport]
    total: CostReport
    events: dict[int, list[OnlineEvent]]


def run_horizon(
    users_for_day: Callable[[int], Sequence[FleetUser]],
    da: PriceMatrix,
    rt: PriceMatrix,
    cfg: DayConfig = DayConfig(),
    days: Sequence[int] | None = None,
    clearing_seed: int = 0,
    sigma: HourlyStd | None = None,
    backend: str | None = None,
    progress: Callable[[int, DayResult], None] | None = None,
) -> HorizonReport:
    """Run ``run_day`` for each 1-based day and total the four cost columns.

    ``sigma`` defaults to the hourly std of the RT matrix. Day ``d`` draws its
    DA clearing noise from the seed ``[clearing_seed, d]``.
    """
    if da.days != rt.days:
        raise ValueError(f"DA has {da.days} days but RT has {rt.days}")
    sigma = hourly_std(rt) if sigma is None else sigma
    days = list(range(1, da.days + 1)) if days is None else list(days)
    daily, events = [], {}
    for d in days:
        try:
            result = run_day(
                users_for_day(d), DayPrices.from_matrices(da, rt, d), sigma, cfg, [clearing_seed, d], backend
            )
        except Exception as exc:
            raise HorizonError(d, exc) from exc
        daily.append(result.report)
        events[d] = result.events
        if progress:
            progress(d, result)
    return HorizonReport(days, daily, sum_reports(daily), events)
