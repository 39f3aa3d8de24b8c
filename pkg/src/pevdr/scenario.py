"""Flat key-value scenario files and the objects they resolve to."""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, fields
from typing import Any

import yaml

from .coordinator import ConvergenceConfig, DayConfig
from .fleet import Distribution, FleetConfig, FleetUser, read_fleet_file, synthesize_fleet
from .prices import MarketKind, PriceMatrix, ThresholdConfig, read_price_file
from .synthetic import SyntheticPrices, synthetic_prices


class ScenarioError(ValueError):
    """Bad key, bad value or missing file in a scenario."""


@dataclass(frozen=True)
class Scenario:
    # fleet
    n_users: int = 50
    with_pevs: bool = True
    fleet_file: str | None = None
    fleet_seed: int = 0
    arrival: str = "truncnorm:18.0,2.0,12.0,24.0"
    departure: str = "truncnorm:7.5,1.5,1.0,12.0"
    energy: str = "uniform:4.0,16.0"
    charger_kw: float = 1.8
    battery_kwh: float = 24.0
    # prices: files, or the synthetic generator when both are unset
    da_file: str | None = None
    rt_file: str | None = None
    price_seed: int = 7
    price_days: int = 365
    spike_day: int | None = 68
    spike_hour: int = 9
    spike_factor: float = 8.0
    trough_hour: int | None = 21
    trough_factor: float = 0.1
    random_spike_rate: float = 0.03
    # coordination
    lam: float = 0.5
    window_k: int = 3
    deadband_epsilon: float = 0.0
    b_scope: str = "full"
    objective_unit: str = "MWh"
    sellback: bool = True
    v2g_enabled: bool = True
    soc_floor_fraction: float = 0.2
    max_sweeps: int = 5
    mse_tolerance: float = 1e-6
    sweep_mode: str = "gauss-seidel"
    clearing_seed: int = 100
    # which days: `day` for run-day, `days` ("a..b" or a list) for run-year
    day: int = 68
    days: Any = None

    def __post_init__(self):
        if (self.da_file is None) != (self.rt_file is None):
            raise ScenarioError("da_file and rt_file must be given together")
        for path in (self.da_file, self.rt_file, self.fleet_file):
            if path is not None and not os.path.isfile(path):
                raise ScenarioError(f"file not found: {path}")
        try:
            self.fleet_config()
            self.day_config()
        except ValueError as exc:
            raise ScenarioError(str(exc)) from None
        if self.day < 1:
            raise ScenarioError("day must be >= 1")
        object.__setattr__(self, "days", _normalize_days(self.days))

    def fleet_config(self) -> FleetConfig:
        return FleetConfig(
            n_users=self.n_users,
            arrival_dist=Distribution.parse(self.arrival),
            departure_dist=Distribution.parse(self.departure),
            energy_dist=Distribution.parse(self.energy),
            charger_kw=self.charger_kw,
            battery_kwh=self.battery_kwh,
            v2g_enabled=self.v2g_enabled,
            soc_floor_fraction=self.soc_floor_fraction,
        )

    def day_config(self) -> DayConfig:
        return DayConfig(
            lam=self.lam,
            threshold=ThresholdConfig(self.window_k, self.deadband_epsilon),
            b_scope=self.b_scope,
            objective_unit=self.objective_unit,
            convergence=ConvergenceConfig(self.max_sweeps, self.mse_tolerance, self.sweep_mode),
            v2g_enabled=self.v2g_enabled,
            soc_floor_fraction=self.soc_floor_fraction,
            sellback=self.sellback,
        )

    def synthetic(self) -> SyntheticPrices:
        return synthetic_prices(
            self.price_seed,
            days=self.price_days,
            spike_day=self.spike_day,
            spike_hour=self.spike_hour,
            spike_factor=self.spike_factor,
            trough_hour=self.trough_hour,
            trough_factor=self.trough_factor,
            random_spike_rate=self.random_spike_rate,
        )

    def prices(self) -> tuple[PriceMatrix, PriceMatrix]:
        if self.da_file is not None:
            return read_price_file(self.da_file, MarketKind.DA), read_price_file(self.rt_file, MarketKind.RT)
        sp = self.synthetic()
        return sp.da, sp.rt

    def users_for_day(self, day: int) -> list:
        """The fleet file as-is, or a fleet synthesized from seed [fleet_seed, day].

        With ``with_pevs`` off only the household baselines are kept.
        """
        if self.fleet_file is not None:
            users: list[FleetUser] = read_fleet_file(self.fleet_file)
        else:
            users = synthesize_fleet(self.fleet_config(), [self.fleet_seed, day])
        if not self.with_pevs:
            return [(household, None) for household, _ in users]
        return users

    def horizon_days(self, available: int) -> list[int]:
        days = list(range(1, available + 1)) if self.days is None else list(self.days)
        bad = [d for d in days if not 1 <= d <= available]
        if bad:
            raise ScenarioError(f"days {bad} outside the price data (1..{available})")
        return days

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        if self.days is not None:
            out["days"] = list(self.days)
        return out

    def dump(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False, default_flow_style=None)

    def replace(self, **changes) -> "Scenario":
        return from_dict({**self.to_dict(), **changes})


def _normalize_days(value):
    if value is None:
        return None
    if isinstance(value, str):
        first, sep, last = value.partition("..")
        try:
            if sep:
                return tuple(range(int(first), int(last) + 1))
            return tuple(int(v) for v in value.split(","))
        except ValueError:
            raise ScenarioError(f"bad days selector {value!r}; use 'a..b' or 'a,b,c'") from None
    if isinstance(value, int):
        return (value,)
    try:
        return tuple(int(v) for v in value)
    except (TypeError, ValueError):
        raise ScenarioError(f"bad days selector {value!r}") from None


SCENARIO_KEYS = tuple(f.name for f in fields(Scenario))
# Relative paths in a scenario file are resolved against the file's directory.
FILE_KEYS = ("fleet_file", "da_file", "rt_file")


def from_dict(data: dict) -> Scenario:
    unknown = sorted(set(data) - set(SCENARIO_KEYS))
    if unknown:
        raise ScenarioError(f"unknown scenario keys: {', '.join(unknown)}")
    try:
        return Scenario(**data)
    except TypeError as exc:
        raise ScenarioError(str(exc)) from None


def load_scenario(path) -> Scenario:
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ScenarioError(f"file not found: {path}") from None
    except yaml.YAMLError as exc:
        raise ScenarioError(f"{path}: {exc}") from None
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ScenarioError(f"{path}: expected a flat key: value document")
    nested = [k for k, v in data.items() if isinstance(v, dict)]
    if nested:
        raise ScenarioError(f"{path}: nested keys not allowed: {', '.join(nested)}")
    base = os.path.dirname(os.path.abspath(path))
    for key in FILE_KEYS:
        value = data.get(key)
        if isinstance(value, str) and not os.path.isabs(value):
            data[key] = os.path.normpath(os.path.join(base, value))
    return from_dict(data)
