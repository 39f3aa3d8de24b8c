"""Procurement-cost accounting for one day of DA purchase plus RT balancing.

Demands are kWh, prices $/MWh; the kWh->MWh conversion happens only here.
Money is exact ``Decimal``: each price*quantity product of the underlying
binary floats is summed exactly and the total is rounded once to cents.
"""

from __future__ import annotations

import decimal
from dataclasses import dataclass
from decimal import Decimal

import numpy as np

from .prices import HOURS

CENT = Decimal("0.01")
TENTH = Decimal("0.1")
_CTX = decimal.Context(prec=120, rounding=decimal.ROUND_HALF_EVEN)


def _vec(values, name):
    arr = np.array(values, dtype=float)
    if arr.shape != (HOURS,):
        raise ValueError(f"{name} must have 24 entries, got shape {arr.shape}")
    return arr


def money(prices, quantities_kwh) -> Decimal:
    """sum(price * kWh) / 1000, exact before the final rounding to cents."""
    total = Decimal(0)
    for p, q in zip(prices, quantities_kwh):
        total = _CTX.add(total, _CTX.multiply(Decimal(float(p)), Decimal(float(q))))
    return _CTX.divide(total, Decimal(1000)).quantize(CENT, context=_CTX)


def round_report(value: Decimal | None) -> Decimal | None:
    """Round to $0.1 for display."""
    return None if value is None else value.quantize(TENTH, context=_CTX)


@dataclass(frozen=True)
class DayLedger:
    da_purchase: np.ndarray
    da_prices: np.ndarray
    rt_prices: np.ndarray
    realized_demand: np.ndarray
    imbalance: np.ndarray
    da_cost: Decimal
    rt_cost: Decimal
    total_cost: Decimal
    sellback: bool = True


def settle_day(da_purchase, realized_demand, da_prices, rt_prices, sellback_enabled: bool = True) -> DayLedger:
    """Pay DA prices for the purchase and RT prices for the imbalance.

    With sell-back, surplus (negative imbalance) earns the RT price; without
    it, surplus is stranded and only shortfalls are paid for.
    """
    purchase = _vec(da_purchase, "da_purchase")
    realized = _vec(realized_demand, "realized_demand")
    pd = _vec(da_prices, "da_prices")
    pr = _vec(rt_prices, "rt_prices")
    imbalance = realized - purchase
    da_cost = money(pd, purchase)
    settled = imbalance if sellback_enabled else np.maximum(imbalance, 0.0)
    rt_cost = money(pr, settled)
    return DayLedger(purchase, pd, pr, realized, imbalance, da_cost, rt_cost, da_cost + rt_cost, sellback_enabled)


def ideal_cost(realized_demand, da_prices) -> Decimal:
    """Cost if the whole demand had been bought day-ahead."""
    return money(_vec(da_prices, "da_prices"), _vec(realized_demand, "realized_demand"))


@dataclass(frozen=True)
class CostReport:
    """Four-way comparison; ``None`` marks a column that does not apply (no PEVs)."""

    ideal: Decimal
    real_uncoordinated: Decimal
    after_p1: Decimal | None
    after_p2: Decimal | None

    COLUMNS = ("ideal", "real_uncoordinated", "after_p1", "after_p2")

    def __add__(self, other: "CostReport") -> "CostReport":
        def add(a, b):
            return None if a is None or b is None else a + b

        return CostReport(*(add(getattr(self, c), getattr(other, c)) for c in self.COLUMNS))

    def as_dict(self, rounded: bool = False) -> dict:
        out = {}
        for c in self.COLUMNS:
            v = getattr(self, c)
            if rounded:
                v = round_report(v)
            out[c] = "N/A" if v is None else str(v)
        return out


def sum_reports(reports) -> CostReport:
    reports = list(reports)
    if not reports:
        zero = Decimal("0.00")
        return CostReport(zero, zero, zero, zero)
    total = reports[0]
    for r in reports[1:]:
        total = total + r
    return total
