"""Retailer side of the coordination protocol.

Everything here works on 24-vectors of demand and on prices. Users report
their total load (household + PEV) and receive back the aggregate of
everyone else minus the DA purchase; no PEV parameters cross this boundary.
"""

from __future__ import annotations

import numpy as np

from ..prices import HOURS, DayPrices, HourlyStd, ThresholdConfig, altering_sign, threshold_gamma

AGGREGATE_TOL = 1e-9


class Retailer:
    def __init__(self, reported_loads, target_da):
        self.loads = [np.array(v, dtype=float) for v in reported_loads]
        self.target = np.array(target_da, dtype=float)
        if self.target.shape != (HOURS,):
            raise ValueError("target_da must have 24 entries")
        self.aggregate = self.recompute()

    def copy(self) -> "Retailer":
        new = Retailer.__new__(Retailer)
        new.loads = [v.copy() for v in self.loads]
        new.target = self.target.copy()
        new.aggregate = self.aggregate.copy()
        return new

    def recompute(self) -> np.ndarray:
        total = np.zeros(HOURS)
        for v in self.loads:
            total += v
        return total

    def others(self, n: int) -> np.ndarray:
        """Aggregate load of every user except ``n``."""
        return self.aggregate - self.loads[n]

    def signal(self, n: int) -> np.ndarray:
        """What user ``n`` receives: others' aggregate minus the DA purchase."""
        return self.others(n) - self.target

    def update(self, n: int, new_load) -> None:
        new_load = np.asarray(new_load, dtype=float)
        self.aggregate += new_load - self.loads[n]
        self.loads[n] = new_load.copy()

    def drift(self) -> float:
        """Largest gap between the incremental aggregate and a fresh sum."""
        return float(np.max(np.abs(self.aggregate - self.recompute()), initial=0.0))

    def resync(self) -> None:
        self.aggregate = self.recompute()


def decide_altering(day: DayPrices, sigma: HourlyStd, cfg: ThresholdConfig, t0: int):
    """Threshold and altering sign at hour ``t0`` from prices observed so far."""
    gamma = threshold_gamma(day, sigma, cfg, t0, day.rt[:t0])
    return gamma, altering_sign(float(day.rt[t0 - 1]), gamma, cfg.deadband_epsilon)


def tracking_potential(aggregate, target) -> float:
    """sum_t a(t)^2 - 2 a(t) l^d(t)."""
    a = np.asarray(aggregate, dtype=float)
    return float(np.sum(a * a - 2.0 * a * np.asarray(target, dtype=float)))


def sweep_mse(before, after) -> float:
    diff = np.asarray(after, dtype=float) - np.asarray(before, dtype=float)
    return float(np.mean(diff * diff))
