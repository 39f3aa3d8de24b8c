"""Households, PEV profiles and fleet synthesis.

A PEV's availability window runs from its arrival hour to its departure hour
inclusive and wraps through midnight when departure < arrival, so an
overnight session is scheduled on one cyclic 24-slot day.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np

from .prices import HOURS, wrap_hour

REFERENCE_CAPACITY_KWH = 24.0
MAX_RESAMPLES = 1000

# kW per household, double-peaked (morning and evening).
DEFAULT_BASELINE_TEMPLATE = (
    0.45, 0.40, 0.38, 0.37, 0.38, 0.45, 0.70, 0.95, 0.85, 0.65, 0.60, 0.60,
    0.62, 0.60, 0.60, 0.65, 0.80, 1.05, 1.30, 1.40, 1.30, 1.10, 0.80, 0.55,
)


class ProfileError(ValueError):
    """A PEV profile or household violates one of its invariants."""

    def __init__(self, message: str, row: int | None = None, invariant: str | None = None):
        self.row = row
        self.invariant = invariant
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class FleetConfigError(ValueError):
    pass


def soc_at_arrival(energy_need: float, capacity: float) -> float:
    """Arrival state of charge in kWh, assuming a full battery at next departure.

    The percentage form is 100 * (1 - E / 24); it is applied to ``capacity``,
    so a 24 kWh battery arrives holding exactly ``capacity - energy_need``.
    """
    if energy_need < 0:
        raise ProfileError(f"energy need {energy_need} is negative", invariant="soc")
    if energy_need > REFERENCE_CAPACITY_KWH:
        raise ProfileError(
            f"energy need {energy_need} kWh exceeds {REFERENCE_CAPACITY_KWH} kWh; "
            "arrival SOC would be negative",
            invariant="soc",
        )
    if energy_need > capacity:
        raise ProfileError(f"energy need {energy_need} exceeds capacity {capacity}", invariant="soc")
    if capacity == REFERENCE_CAPACITY_KWH:
        return capacity - energy_need
    return capacity * (1.0 - energy_need / REFERENCE_CAPACITY_KWH)


def window_slots(arrival: int, departure: int) -> tuple[int, ...]:
    if departure >= arrival:
        return tuple(range(arrival, departure + 1))
    return tuple(range(arrival, HOURS + 1)) + tuple(range(1, departure + 1))


@dataclass(frozen=True)
class PevProfile:
    arrival: int
    departure: int
    energy_need: float
    power_limit: float = 1.8
    capacity: float = 24.0
    soc_at_arrival: float | None = None

    def __post_init__(self):
        if self.soc_at_arrival is None:
            object.__setattr__(self, "soc_at_arrival", soc_at_arrival(self.energy_need, self.capacity))
        validate_profile(self)

    @property
    def slots(self) -> tuple[int, ...]:
        return window_slots(self.arrival, self.departure)


@dataclass(frozen=True)
class Household:
    baseline: np.ndarray

    def __post_init__(self):
        baseline = np.array(self.baseline, dtype=float)
        if baseline.shape != (HOURS,):
            raise ProfileError(f"baseline must have 24 entries, got {baseline.shape}", invariant="baseline")
        if not np.all(np.isfinite(baseline)) or np.any(baseline < 0):
            raise ProfileError("baseline entries must be finite and non-negative", invariant="baseline")
        baseline.setflags(write=False)
        object.__setattr__(self, "baseline", baseline)


def validate_profile(profile: PevProfile) -> None:
    """Raise ProfileError naming the first violated invariant."""
    for name in ("arrival", "departure"):
        hour = getattr(profile, name)
        if int(hour) != hour or not 1 <= hour <= HOURS:
            raise ProfileError(f"{name} hour {hour} outside 1..24", invariant=name)
    if not profile.power_limit > 0:
        raise ProfileError("power limit must be positive", invariant="power_limit")
    if not profile.capacity > 0:
        raise ProfileError("capacity must be positive", invariant="capacity")
    if profile.energy_need < 0:
        raise ProfileError("energy need must be non-negative", invariant="energy_need")
    deliverable = profile.power_limit * len(window_slots(profile.arrival, profile.departure))
    if profile.energy_need > deliverable + 1e-12:
        raise ProfileError(
            f"energy need {profile.energy_need} kWh exceeds deliverable {deliverable:g} kWh",
            invariant="deliverable",
        )
    soc = profile.soc_at_arrival
    if not 0 <= soc <= profile.capacity:
        raise ProfileError(f"arrival SOC {soc} outside [0, {profile.capacity}]", invariant="soc")
    if soc + profile.energy_need > profile.capacity + 1e-9:
        raise ProfileError(
            f"arrival SOC {soc} + need {profile.energy_need} exceeds capacity {profile.capacity}",
            invariant="capacity_fill",
        )


def permissible_slots(profile: PevProfile) -> tuple[int, ...]:
    """Connected hours in charging order, wrapping 24 -> 1 for overnight windows."""
    return profile.slots


def uncoordinated_schedule(profile: PevProfile) -> np.ndarray:
    """Plug-and-charge: full power from arrival until the need is met."""
    schedule = np.zeros(HOURS)
    remaining = profile.energy_need
    for slot in profile.slots:
        if remaining <= 0:
            break
        step = min(profile.power_limit, remaining)
        schedule[slot - 1] = step
        remaining -= step
    return schedule


@dataclass(frozen=True)
class Distribution:
    """A named parametric distribution, written as ``name:p1,p2,...``.

    ``point:v``, ``uniform:low,high`` and ``truncnorm:mean,sd,low,high`` are
    supported; truncation is by rejection.
    """

    name: str
    params: tuple[float, ...]

    _ARITY = {"point": 1, "uniform": 2, "truncnorm": 4}

    def __post_init__(self):
        if self.name not in self._ARITY:
            raise FleetConfigError(f"unknown distribution {self.name!r}")
        if len(self.params) != self._ARITY[self.name]:
            raise FleetConfigError(f"{self.name} takes {self._ARITY[self.name]} parameters")

    @classmethod
    def parse(cls, text: "str | Distribution") -> "Distribution":
        if isinstance(text, Distribution):
            return text
        name, _, rest = str(text).partition(":")
        try:
            params = tuple(float(p) for p in rest.split(",") if p.strip())
        except ValueError:
            raise FleetConfigError(f"bad distribution parameters in {text!r}") from None
        return cls(name.strip(), params)

    def __str__(self):
        return f"{self.name}:" + ",".join(repr(p) for p in self.params)

    def sample(self, rng: np.random.Generator) -> float:
        if self.name == "point":
            return self.params[0]
        if self.name == "uniform":
            return float(rng.uniform(self.params[0], self.params[1]))
        mean, sd, low, high = self.params
        for _ in range(MAX_RESAMPLES):
            x = float(rng.normal(mean, sd))
            if low <= x <= high:
                return x
        raise FleetConfigError(f"truncnorm {self} rejected {MAX_RESAMPLES} draws")


@dataclass(frozen=True)
class FleetConfig:
    n_users: int = 50
    arrival_dist: Distribution = field(default_factory=lambda: Distribution("truncnorm", (18.0, 2.0, 12.0, 24.0)))
    departure_dist: Distribution = field(default_factory=lambda: Distribution("truncnorm", (7.5, 1.5, 1.0, 12.0)))
    energy_dist: Distribution = field(default_factory=lambda: Distribution("uniform", (4.0, 16.0)))
    charger_kw: float = 1.8
    battery_kwh: float = 24.0
    v2g_enabled: bool = True
    soc_floor_fraction: float = 0.2
    baseline_template: tuple[float, ...] = DEFAULT_BASELINE_TEMPLATE
    baseline_noise: tuple[float, float] = (0.8, 1.2)

    def __post_init__(self):
        for name in ("arrival_dist", "departure_dist", "energy_dist"):
            object.__setattr__(self, name, Distribution.parse(getattr(self, name)))
        object.__setattr__(self, "baseline_template", tuple(float(v) for v in self.baseline_template))
        if self.n_users < 0:
            raise FleetConfigError("n_users must be >= 0")
        if not 0 <= self.soc_floor_fraction < 1:
            raise FleetConfigError("soc_floor_fraction must be in [0, 1)")
        if len(self.baseline_template) != HOURS or min(self.baseline_template) < 0:
            raise FleetConfigError("baseline_template must be 24 non-negative values")


FleetUser = tuple[Household, PevProfile]


def _draw_profile(cfg: FleetConfig, rng: np.random.Generator) -> PevProfile:
    for _ in range(MAX_RESAMPLES):
        arrival = wrap_hour(round(cfg.arrival_dist.sample(rng)))
        departure = wrap_hour(round(cfg.departure_dist.sample(rng)))
        energy = cfg.energy_dist.sample(rng)
        try:
            return PevProfile(arrival, departure, energy, cfg.charger_kw, cfg.battery_kwh)
        except ProfileError:
            continue
    raise FleetConfigError(f"no valid profile after {MAX_RESAMPLES} draws; check the distributions")


def synthesize_fleet(cfg: FleetConfig, rng_seed) -> list[FleetUser]:
    """Draw ``cfg.n_users`` (household, PEV) pairs with PCG64 seeded by ``rng_seed``."""
    rng = np.random.Generator(np.random.PCG64(rng_seed))
    template = np.asarray(cfg.baseline_template)
    lo, hi = cfg.baseline_noise
    users = []
    for _ in range(cfg.n_users):
        profile = _draw_profile(cfg, rng)
        baseline = template * rng.uniform(lo, hi, size=HOURS)
        users.append((Household(baseline), profile))
    return users


def load_fleet(source: TextIO | str) -> list[FleetUser]:
    """Parse rows of ``arrival, departure, E_kWh, p_max_kW, C_kWh, <24 baseline kWh>``."""
    if isinstance(source, str):
        source = io.StringIO(source)
    users = []
    for index, fields in enumerate(csv.reader(source), start=1):
        if not fields or all(not f.strip() for f in fields):
            continue
        try:
            values = [float(f) for f in fields]
        except ValueError:
            if index == 1:
                continue
            raise ProfileError("non-numeric field", row=index, invariant="format") from None
        if len(values) != 5 + HOURS:
            raise ProfileError(f"expected 29 fields, found {len(values)}", row=index, invariant="format")
        arrival, departure = values[0], values[1]
        if arrival != math.floor(arrival) or departure != math.floor(departure):
            raise ProfileError("arrival/departure must be whole hours", row=index, invariant="format")
        try:
            profile = PevProfile(int(arrival), int(departure), values[2], values[3], values[4])
            household = Household(values[5:])
        except ProfileError as exc:
            raise ProfileError(str(exc), row=index, invariant=exc.invariant) from None
        users.append((household, profile))
    return users


def read_fleet_file(path) -> list[FleetUser]:
    with open(path, newline="") as fh:
        return load_fleet(fh)


def write_fleet(users: list[FleetUser], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["arrival", "departure", "energy_kwh", "p_max_kw", "capacity_kwh"] + [f"base_h{h}" for h in range(1, HOURS + 1)])
    for household, p in users:
        writer.writerow(
            [p.arrival, p.departure, repr(float(p.energy_need)), repr(float(p.power_limit)), repr(float(p.capacity))]
            + [repr(float(v)) for v in household.baseline]
        )
