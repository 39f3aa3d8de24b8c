"""Hourly DA/RT price data, volatility statistics and the altering threshold.

Hours are labelled 1..24 throughout. Prices are in $/MWh.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, TextIO

import numpy as np

HOURS = 24


class PriceFormatError(ValueError):
    """Raised for malformed price files."""

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class DegenerateWeightsError(ValueError):
    """The hourly std at the start of the window is zero, so weights cannot be normalized."""


class MarketKind(str, Enum):
    DA = "DA"
    RT = "RT"


@dataclass(frozen=True)
class PriceMatrix:
    """Day-major grid of hourly prices, shape (D, 24)."""

    market_kind: MarketKind
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2 or values.shape[1] != HOURS:
            raise PriceFormatError(f"expected a (D, 24) grid, got shape {values.shape}")
        if values.shape[0] < 1:
            raise PriceFormatError("price matrix has no days")
        if not np.all(np.isfinite(values)):
            raise PriceFormatError("price matrix contains non-finite entries")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "market_kind", MarketKind(self.market_kind))

    @property
    def days(self) -> int:
        return self.values.shape[0]

    def day(self, index: int) -> np.ndarray:
        """Prices for 1-based day ``index``."""
        if not 1 <= index <= self.days:
            raise IndexError(f"day {index} outside 1..{self.days}")
        return self.values[index - 1]

    def cell(self, day: int, hour: int) -> float:
        return float(self.day(day)[hour - 1])


@dataclass(frozen=True)
class HourlyStd:
    sigma: np.ndarray

    def __post_init__(self):
        sigma = np.array(self.sigma, dtype=float)
        if sigma.shape != (HOURS,) or np.any(sigma < 0) or not np.all(np.isfinite(sigma)):
            raise ValueError("sigma must be 24 finite non-negative values")
        sigma.setflags(write=False)
        object.__setattr__(self, "sigma", sigma)

    def at(self, hour: int) -> float:
        return float(self.sigma[hour - 1])


def _vec24(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.shape != (HOURS,):
        raise ValueError(f"{name} must have 24 entries, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class DayPrices:
    """One day's DA and RT prices plus the previous day's realized RT prices.

    ``rt_prev_day`` feeds threshold windows that reach back past hour 1. On the
    first simulated day there is no realized history, so callers pass the
    day's own DA prices.
    """

    da: np.ndarray
    rt: np.ndarray
    rt_prev_day: np.ndarray

    def __post_init__(self):
        for name in ("da", "rt", "rt_prev_day"):
            object.__setattr__(self, name, _vec24(getattr(self, name), name))

    @classmethod
    def from_matrices(cls, da: PriceMatrix, rt: PriceMatrix, day: int) -> "DayPrices":
        prev = rt.day(day - 1) if day > 1 else da.day(day)
        return cls(da=da.day(day), rt=rt.day(day), rt_prev_day=prev)


@dataclass(frozen=True)
class ThresholdConfig:
    window_k: int = 3
    deadband_epsilon: float = 0.0

    def __post_init__(self):
        if not 1 <= int(self.window_k) <= 23:
            raise ValueError(f"window_k must be in 1..23, got {self.window_k}")
        if self.deadband_epsilon < 0:
            raise ValueError("deadband_epsilon must be >= 0")


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def load_price_matrix(source: TextIO | str, market_kind: MarketKind | str) -> PriceMatrix:
    """Parse rows of 24 comma-separated prices (one day per row).

    A single header row is accepted when its first field is not numeric.
    ``source`` is an open text stream or a string holding the CSV text.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    rows = []
    for index, fields in enumerate(csv.reader(source), start=1):
        if not fields or all(not f.strip() for f in fields):
            continue
        if index == 1 and not _is_number(fields[0].strip()):
            continue
        if len(fields) != HOURS:
            raise PriceFormatError(f"expected 24 fields, found {len(fields)}", row=index)
        try:
            rows.append([float(f) for f in fields])
        except ValueError as exc:
            raise PriceFormatError(f"non-numeric field ({exc})", row=index) from None
        if not all(np.isfinite(rows[-1])):
            raise PriceFormatError("non-finite price", row=index)
    if not rows:
        raise PriceFormatError("empty price stream")
    return PriceMatrix(market_kind, np.array(rows))


def read_price_file(path, market_kind: MarketKind | str) -> PriceMatrix:
    with open(path, newline="") as fh:
        return load_price_matrix(fh, market_kind)


def write_price_matrix(matrix: PriceMatrix, stream: TextIO) -> None:
    """Write one day per row; ``repr`` keeps the floats round-trippable."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow([f"h{h}" for h in range(1, HOURS + 1)])
    for row in matrix.values:
        writer.writerow([repr(float(v)) for v in row])


def hourly_std(matrix: PriceMatrix) -> HourlyStd:
    """Population (1/D) standard deviation of each hour-of-day column."""
    return HourlyStd(np.std(matrix.values, axis=0, ddof=0))


def wrap_hour(i: int) -> int:
    """Map any integer hour onto 1..24 (so 0 -> 24, -2 -> 22, 25 -> 1)."""
    return (int(i) - 1) % HOURS + 1


def window_hours(t: int, window_k: int) -> list[int]:
    """Raw (unwrapped) indices t-K, ..., t of the threshold window."""
    return list(range(t - window_k, t + 1))


def threshold_gamma(
    day: DayPrices,
    sigma: HourlyStd,
    cfg: ThresholdConfig,
    t: int,
    observed_rt: Iterable[float],
) -> float:
    """Volatility-weighted moving average of RT prices over hours t-K..t.

    Each price is weighted by sigma(hour) / sigma(t-K) and the sum is divided
    by K, even though the window has K+1 terms. Window hours that fall before
    hour 1 read the previous day's RT prices; hours 1..t read ``observed_rt``.
    """
    if not 1 <= t <= HOURS:
        raise ValueError(f"t must be in 1..24, got {t}")
    observed = np.asarray(list(observed_rt), dtype=float)
    if observed.shape[0] < t:
        raise ValueError(f"observed_rt must cover hours 1..{t}, has {observed.shape[0]}")
    k = int(cfg.window_k)
    ref = sigma.at(wrap_hour(t - k))
    if ref == 0.0:
        raise DegenerateWeightsError(
            f"sigma at hour {wrap_hour(t - k)} is zero; cannot normalize window weights"
        )
    total = 0.0
    for i in window_hours(t, k):
        hour = wrap_hour(i)
        price = observed[i - 1] if i >= 1 else day.rt_prev_day[hour - 1]
        total += sigma.at(hour) / ref * price
    return total / k


def altering_sign(rt_price: float, gamma: float, epsilon: float = 0.0) -> int | None:
    """+1 when the RT price is above the dead-band around gamma, -1 below, else None."""
    if rt_price > gamma + epsilon:
        return 1
    if rt_price < gamma - epsilon:
        return -1
    return None


def clear_da_demand(required, rng_seed) -> np.ndarray:
    """Cleared DA quantity: required(t) plus i.i.d. U[-0.2 r(t), 0.2 r(t)) noise.

    Uses numpy's PCG64 generator seeded with ``rng_seed`` (an int or a
    sequence of ints), so the draw is reproducible across runs.
    """
    req = np.asarray(required, dtype=float)
    if req.shape != (HOURS,):
        raise ValueError("required must have 24 entries")
    if np.any(req < 0):
        raise ValueError("required demand must be non-negative")
    rng = np.random.Generator(np.random.PCG64(rng_seed))
    u = rng.uniform(-0.2 * req, 0.2 * req)
    return req + u
