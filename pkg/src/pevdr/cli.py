"""Command line: run-day, run-year, stats, make-fixtures.

Exit codes: 0 success, 1 usage, 2 data or parse error, 3 infeasible.
Outputs carry no timestamps, so identical inputs give identical bytes.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import logging
import os
import sys
from typing import Sequence

import numpy as np
import yaml

from .coordinator import HorizonError, UserInfeasibleError
from .fleet import FleetConfig, FleetConfigError, ProfileError, synthesize_fleet, write_fleet
from .ledger import round_report
from .prices import (
    HOURS,
    DayPrices,
    DegenerateWeightsError,
    PriceFormatError,
    ThresholdConfig,
    altering_sign,
    hourly_std,
    threshold_gamma,
    write_price_matrix,
)
from .experiments import scenario_day, scenario_horizon, stranded_surplus_cost
from .scenario import Scenario, ScenarioError, from_dict, load_scenario
from .solver import InfeasibleError, SolverError
from .synthetic import synthetic_prices

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INFEASIBLE = 0, 1, 2, 3
DATA_ERRORS = (ScenarioError, PriceFormatError, ProfileError, FleetConfigError, DegenerateWeightsError, OSError)

log = logging.getLogger("pevdr")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _optional_int(text: str):
    return None if text.lower() in ("none", "null", "") else int(text)


def _scenario_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("scenario overrides (defaults come from --config, then built-ins)")
    for f in dataclasses.fields(Scenario):
        flag = "--" + f.name.replace("_", "-")
        default = f.default
        kwargs = {"dest": f.name, "default": argparse.SUPPRESS}
        if isinstance(default, bool):
            kwargs["action"] = argparse.BooleanOptionalAction
        elif f.name in ("spike_day", "trough_hour"):
            kwargs["type"] = _optional_int
        elif isinstance(default, int):
            kwargs["type"] = int
        elif isinstance(default, float):
            kwargs["type"] = float
        else:
            kwargs["type"] = str
        group.add_argument(flag, **kwargs)


def _common(parser: argparse.ArgumentParser, out_default: str) -> None:
    parser.add_argument("--config", help="flat YAML scenario file")
    parser.add_argument("--seed", type=int, help="sets both fleet_seed and clearing_seed")
    parser.add_argument("--out-dir", default=out_default, help="output directory (default: %(default)s)")
    parser.add_argument("--backend", choices=("python", "cython"), help="simplex kernel (default: fastest available)")
    parser.add_argument("-v", "--verbose", action="store_true")
    _scenario_flags(parser)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pevdr", description="PEV demand shaping and altering against DA/RT prices.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = sub.add_parser("run-day", help="shape and alter one day; write ledger, aggregates and event log")
    _common(p, "pevdr-run-day")
    p = sub.add_parser("run-year", help="run every selected day and total the four cost columns")
    _common(p, "pevdr-run-year")
    p.add_argument("--progress", action="store_true", help="print one line per finished day to stderr")
    p = sub.add_parser("stats", help="hourly sigma of DA and RT prices and the threshold trace of one day")
    _common(p, "pevdr-stats")
    p = sub.add_parser("make-fixtures", help="write a synthetic price year, a fleet and two scenarios")
    p.add_argument("--seed", type=int, default=7, help="price and fleet seed (default: %(default)s)")
    p.add_argument("--out-dir", default="fixtures", help="output directory (default: %(default)s)")
    p.add_argument("--n-users", type=int, default=50)
    p.add_argument("--spike-day", type=int, default=68)
    p.add_argument("-v", "--verbose", action="store_true")
    return parser


def resolve_scenario(args: argparse.Namespace) -> Scenario:
    data = load_scenario(args.config).to_dict() if args.config else {}
    names = {f.name for f in dataclasses.fields(Scenario)}
    data.update({k: v for k, v in vars(args).items() if k in names})
    if args.seed is not None:
        data["fleet_seed"] = data["clearing_seed"] = args.seed
    for key in ("fleet_file", "da_file", "rt_file"):
        if data.get(key):
            data[key] = os.path.abspath(data[key])
    return from_dict(data)


def _fmt(value) -> str:
    if value is None:
        return ""
    return repr(float(value))


def _write_csv(path: str, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _write_yaml(path: str, data: dict) -> None:
    with open(path, "w") as fh:
        yaml.safe_dump(data, fh, sort_keys=False, default_flow_style=None)


def _event_rows(events, day=None):
    for e in events:
        row = [
            e.t0,
            _fmt(e.rt_price),
            _fmt(e.gamma),
            "" if e.b_sign is None else e.b_sign,
            e.sweeps_run,
            _fmt(e.load_before),
            _fmt(e.load_after),
            " ".join(str(u) for u in e.skipped_users),
            " ".join(_fmt(m) for m in e.mse),
        ]
        yield row if day is None else [day] + row


EVENT_HEADER = ["t0", "rt_price", "gamma", "b_sign", "sweeps_run", "load_before_kwh", "load_after_kwh", "skipped_users", "sweep_mse"]


def _costs(report) -> dict:
    exact = report.as_dict()
    rounded = report.as_dict(rounded=True)
    return {"exact": exact, "rounded": rounded}


def cmd_run_day(scenario: Scenario, out_dir: str, backend=None) -> int:
    result = scenario_day(scenario, backend)
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "scenario.yaml"), "w") as fh:
        fh.write(scenario.dump())

    columns = [("uncoordinated", result.uncoordinated), ("after_p1", result.after_p1), ("after_p2", result.after_p2)]
    _write_csv(
        os.path.join(out_dir, "aggregates.csv"),
        ["hour"] + [name for name, _ in columns] + ["da_purchase"],
        ([t + 1] + [_fmt(None if v is None else v[t]) for _, v in columns] + [_fmt(result.target_da[t])] for t in range(HOURS)),
    )
    arms = list(result.ledgers)
    first = result.ledgers[arms[0]]
    header = ["hour", "da_price", "rt_price", "da_purchase"]
    for arm in arms:
        header += [f"{arm}_demand", f"{arm}_imbalance"]
    rows = []
    for t in range(HOURS):
        row = [t + 1, _fmt(first.da_prices[t]), _fmt(first.rt_prices[t]), _fmt(first.da_purchase[t])]
        for arm in arms:
            led = result.ledgers[arm]
            row += [_fmt(led.realized_demand[t]), _fmt(led.imbalance[t])]
        rows.append(row)
    _write_csv(os.path.join(out_dir, "ledger.csv"), header, rows)
    _write_csv(os.path.join(out_dir, "events.csv"), EVENT_HEADER, _event_rows(result.events))

    sweeps = result.sweep_log
    if sweeps is not None:
        _write_csv(os.path.join(out_dir, "sweeps.csv"), ["sweep", "mse"], ([i + 1, _fmt(m)] for i, m in enumerate(sweeps.mse)))
        _write_csv(
            os.path.join(out_dir, "potentials.csv"),
            ["update", "potential"],
            ([i, _fmt(p)] for i, p in enumerate(sweeps.potentials)),
        )
    signs = [e.b_sign for e in result.events]
    report = {
        "command": "run-day",
        "day": scenario.day,
        "costs": _costs(result.report),
        "real_uncoordinated_without_sellback": str(round_report(stranded_surplus_cost(result))),
        "ledgers": {
            arm: {"da_cost": str(led.da_cost), "rt_cost": str(led.rt_cost), "total_cost": str(led.total_cost)}
            for arm, led in result.ledgers.items()
        },
        "events": {"curtail": signs.count(1), "boost": signs.count(-1), "none": signs.count(None)},
        "offline_sweeps": None
        if sweeps is None
        else {"mode": sweeps.mode, "sweeps": len(sweeps.mse), "converged": sweeps.converged, "mse": [float(m) for m in sweeps.mse]},
    }
    _write_yaml(os.path.join(out_dir, "report.yaml"), report)
    rounded = result.report.as_dict(rounded=True)
    print(" ".join(f"{k}={v}" for k, v in rounded.items()))
    return EXIT_OK


def cmd_run_year(scenario: Scenario, out_dir: str, backend=None, progress=False) -> int:
    def on_day(day, result):
        if progress:
            print(f"day {day}: " + " ".join(f"{k}={v}" for k, v in result.report.as_dict(True).items()), file=sys.stderr)

    horizon = scenario_horizon(scenario, backend, on_day)
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "scenario.yaml"), "w") as fh:
        fh.write(scenario.dump())
    columns = ("ideal", "real_uncoordinated", "after_p1", "after_p2")
    _write_csv(
        os.path.join(out_dir, "daily.csv"),
        ["day", *columns],
        ([d] + list(r.as_dict().values()) for d, r in zip(horizon.days, horizon.daily)),
    )
    _write_csv(
        os.path.join(out_dir, "events.csv"),
        ["day"] + EVENT_HEADER,
        (row for d in horizon.days for row in _event_rows(horizon.events[d], d)),
    )
    _write_yaml(
        os.path.join(out_dir, "report.yaml"),
        {"command": "run-year", "days": len(horizon.days), "first_day": horizon.days[0] if horizon.days else None,
         "last_day": horizon.days[-1] if horizon.days else None, "costs": _costs(horizon.total)},
    )
    print(" ".join(f"{k}={v}" for k, v in horizon.total.as_dict(rounded=True).items()))
    return EXIT_OK


def cmd_stats(scenario: Scenario, out_dir: str) -> int:
    da, rt = scenario.prices()
    if not 1 <= scenario.day <= rt.days:
        raise ScenarioError(f"day {scenario.day} outside the price data (1..{rt.days})")
    s_da, s_rt = hourly_std(da), hourly_std(rt)
    os.makedirs(out_dir, exist_ok=True)
    _write_csv(
        os.path.join(out_dir, "sigma.csv"),
        ["hour", "sigma_da", "sigma_rt"],
        ([h, _fmt(s_da.at(h)), _fmt(s_rt.at(h))] for h in range(1, HOURS + 1)),
    )
    day = DayPrices.from_matrices(da, rt, scenario.day)
    cfg = ThresholdConfig(scenario.window_k, scenario.deadband_epsilon)
    rows = []
    for t in range(1, HOURS + 1):
        try:
            gamma = threshold_gamma(day, s_rt, cfg, t, day.rt[:t])
        except DegenerateWeightsError as exc:
            log.warning("hour %d: %s", t, exc)
            rows.append([t, _fmt(day.rt[t - 1]), "", ""])
            continue
        sign = altering_sign(day.rt[t - 1], gamma, cfg.deadband_epsilon)
        rows.append([t, _fmt(day.rt[t - 1]), _fmt(gamma), "" if sign is None else sign])
    _write_csv(os.path.join(out_dir, "gamma.csv"), ["hour", "rt_price", "gamma", "b_sign"], rows)
    higher = int(np.sum(s_rt.sigma >= s_da.sigma))
    _write_yaml(
        os.path.join(out_dir, "report.yaml"),
        {"command": "stats", "days": rt.days, "day": scenario.day, "hours_rt_sigma_ge_da_sigma": higher},
    )
    print(f"{'hour':>4} {'sigma_da':>10} {'sigma_rt':>10}")
    for h in range(1, HOURS + 1):
        print(f"{h:>4} {s_da.at(h):>10.3f} {s_rt.at(h):>10.3f}")
    print(f"RT sigma >= DA sigma in {higher} of 24 hours")
    return EXIT_OK


def cmd_make_fixtures(seed: int, out_dir: str, n_users: int = 50, spike_day: int = 68) -> int:
    os.makedirs(out_dir, exist_ok=True)
    sp = synthetic_prices(seed, spike_day=spike_day)
    for name, matrix in (("da_prices.csv", sp.da), ("rt_prices.csv", sp.rt)):
        with open(os.path.join(out_dir, name), "w", newline="") as fh:
            write_price_matrix(matrix, fh)
    _write_csv(
        os.path.join(out_dir, "injections.csv"),
        ["day", "hour", "kind", "factor"],
        ([i.day, i.hour, i.kind, _fmt(i.factor)] for i in sp.injections),
    )
    with open(os.path.join(out_dir, "fleet.csv"), "w", newline="") as fh:
        write_fleet(synthesize_fleet(FleetConfig(n_users=n_users), seed), fh)
    base = {"da_file": "da_prices.csv", "rt_file": "rt_prices.csv", "fleet_file": "fleet.csv"}
    _write_yaml(os.path.join(out_dir, "default.yaml"), {**base, "day": 1})
    _write_yaml(os.path.join(out_dir, "spike_day.yaml"), {**base, "day": spike_day})
    print(f"wrote fixtures to {out_dir}")
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "make-fixtures":
            return cmd_make_fixtures(args.seed, args.out_dir, args.n_users, args.spike_day)
        scenario = resolve_scenario(args)
        if args.command == "run-day":
            return cmd_run_day(scenario, args.out_dir, args.backend)
        if args.command == "run-year":
            return cmd_run_year(scenario, args.out_dir, args.backend, args.progress)
        return cmd_stats(scenario, args.out_dir)
    except Exception as exc:
        code = _code(exc.cause if isinstance(exc, HorizonError) else exc)
        if code is None:
            raise
        print(f"pevdr: {exc}", file=sys.stderr)
        return code


def _code(exc: BaseException) -> int | None:
    if isinstance(exc, (InfeasibleError, UserInfeasibleError, SolverError)):
        return EXIT_INFEASIBLE
    if isinstance(exc, DATA_ERRORS):
        return EXIT_DATA
    if isinstance(exc, ValueError):
        return EXIT_DATA
    return None


if __name__ == "__main__":
    sys.exit(main())
