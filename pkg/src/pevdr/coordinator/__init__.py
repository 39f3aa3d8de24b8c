from .protocol import (
    ConvergenceConfig,
    DayConfig,
    DayResult,
    FleetState,
    HorizonError,
    HorizonReport,
    OnlineEvent,
    SweepLog,
    UserInfeasibleError,
    offline_shape,
    online_step,
    run_day,
    run_horizon,
)
from .retailer import Retailer, decide_altering, sweep_mse, tracking_potential
from .users import UserAgent

__all__ = [
    "ConvergenceConfig",
    "DayConfig",
    "DayResult",
    "FleetState",
    "HorizonError",
    "HorizonReport",
    "OnlineEvent",
    "Retailer",
    "SweepLog",
    "UserAgent",
    "UserInfeasibleError",
    "decide_altering",
    "offline_shape",
    "online_step",
    "run_day",
    "run_horizon",
    "sweep_mse",
    "tracking_potential",
]
