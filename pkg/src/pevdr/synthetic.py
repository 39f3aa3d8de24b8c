"""Synthetic DA/RT price years with injected RT spikes and troughs.

DA is a smooth double-peaked daily curve scaled by a seasonal factor and an
autocorrelated day-level factor. RT is DA times bounded heavy-tailed noise
plus an additive heavy-tailed term, so RT hourly volatility exceeds DA's.

The noise scale rises only mildly in peak hours and random spikes may land
in any hour. A steeper volatility profile makes sigma(t)/sigma(t-K) exceed
K around the morning ramp, and then the volatility-weighted threshold sits
above any price at t, so no spike can ever trigger a curtailment.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .prices import HOURS, MarketKind, PriceMatrix

# $/MWh shape of an average day, hours 1..24.
DA_SHAPE = np.array([
    31.0, 29.0, 28.0, 27.5, 28.5, 32.0, 39.0, 47.0, 52.0, 50.0, 48.0, 47.0,
    46.0, 45.0, 45.0, 46.0, 49.0, 55.0, 60.0, 58.0, 53.0, 45.0, 38.0, 33.0,
])
# Relative RT noise scale per hour: 0.15 at the DA minimum, 0.20 at its peak.
RT_SCALE = 0.15 + 0.05 * (DA_SHAPE - DA_SHAPE.min()) / (DA_SHAPE.max() - DA_SHAPE.min())
NOISE_CAP = 0.9
# $/MWh scale of the additive RT noise and its clip in units of that scale.
RT_ADDITIVE = 8.0
ADDITIVE_CAP = 4.0


@dataclass(frozen=True)
class Injection:
    day: int
    hour: int
    kind: str
    factor: float


@dataclass(frozen=True)
class SyntheticPrices:
    da: PriceMatrix
    rt: PriceMatrix
    injections: tuple[Injection, ...]


def synthetic_prices(
    seed,
    days: int = 365,
    spike_day: int | None = 68,
    spike_hour: int = 9,
    spike_factor: float = 8.0,
    trough_hour: int | None = 21,
    trough_factor: float = 0.1,
    random_spike_rate: float = 0.03,
) -> SyntheticPrices:
    """Generate a price year with PCG64 seeded by ``seed``.

    ``spike_day`` (1-based) gets exactly one spike hour at ``spike_hour`` and,
    when ``trough_hour`` is set, one trough hour. Every other day gets a
    single random spike hour with probability ``random_spike_rate``.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    doy = np.arange(days)
    seasonal = 1.0 + 0.22 * np.cos(2 * np.pi * (doy - 15) / 365) + 0.12 * np.cos(4 * np.pi * (doy - 200) / 365)
    level = np.empty(days)
    ar = 0.0
    for d in range(days):
        ar = 0.7 * ar + rng.normal(0.0, 0.10)
        level[d] = np.exp(ar)
    da = DA_SHAPE[None, :] * (seasonal * level)[:, None] + rng.normal(0.0, 1.5, size=(days, HOURS))
    da = np.maximum(da, 1.0)

    noise = rng.standard_t(3, size=(days, HOURS)) * RT_SCALE[None, :]
    additive = np.clip(rng.standard_t(3, size=(days, HOURS)), -ADDITIVE_CAP, ADDITIVE_CAP) * RT_ADDITIVE
    rt = da * (1.0 + np.clip(noise, -NOISE_CAP, NOISE_CAP)) + additive
    rt = np.maximum(rt, 0.5)

    injections = []
    for d in range(1, days + 1):
        if d == spike_day:
            rt[d - 1, spike_hour - 1] = da[d - 1, spike_hour - 1] * spike_factor
            injections.append(Injection(d, spike_hour, "spike", spike_factor))
            if trough_hour is not None:
                rt[d - 1, trough_hour - 1] = da[d - 1, trough_hour - 1] * trough_factor
                injections.append(Injection(d, trough_hour, "trough", trough_factor))
            continue
        if rng.random() < random_spike_rate:
            hour = int(rng.integers(1, HOURS + 1))
            factor = float(rng.uniform(3.0, 8.0))
            rt[d - 1, hour - 1] = da[d - 1, hour - 1] * factor
            injections.append(Injection(d, hour, "spike", factor))
    return SyntheticPrices(PriceMatrix(MarketKind.DA, da), PriceMatrix(MarketKind.RT, rt), tuple(injections))
