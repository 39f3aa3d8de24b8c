"""Time the simplex kernels: compiled extension vs numpy fallback.

Two workloads: a batch of per-user shaping LPs drawn from synthetic fleets,
and one full shaping + altering day. Results of both backends are checked to
be identical before any timing is reported.

    python benchmarks/bench_kernel.py --lps 400 --repeat 3
"""

import argparse
import sys
import time

import numpy as np

from pevdr.coordinator import DayConfig, run_day
from pevdr.fleet import FleetConfig, synthesize_fleet
from pevdr.prices import DayPrices, hourly_std
from pevdr.solver import profile_constraints, solve_schedule
from pevdr.solver.kernel import BACKENDS
from pevdr.synthetic import synthetic_prices


def make_lps(count, seed):
    rng = np.random.default_rng(seed)
    users = synthesize_fleet(FleetConfig(n_users=count), seed)
    out = []
    for i, (household, profile) in enumerate(users):
        cons = profile_constraints(profile, v2g_enabled=bool(i % 2), soc_floor_fraction=0.2)
        cost = household.baseline + rng.normal(0.0, 20.0, size=24)
        out.append((cost, cons))
    return out


def best_of(fn, repeat):
    times = []
    result = None
    for _ in range(repeat):
        start = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - start)
    return min(times), result


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lps", type=int, default=400, help="number of per-user LPs")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--users", type=int, default=50, help="fleet size for the day workload")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    backends = list(BACKENDS)
    if "cython" not in backends:
        print("compiled kernel not built; only the numpy fallback is available", file=sys.stderr)

    lps = make_lps(args.lps, args.seed)
    sp = synthetic_prices(7)
    day = DayPrices.from_matrices(sp.da, sp.rt, 68)
    sigma = hourly_std(sp.rt)
    fleet = synthesize_fleet(FleetConfig(n_users=args.users), args.seed)

    rows, schedules, aggregates = [], {}, {}
    for name in backends:
        t_lp, sched = best_of(lambda: [solve_schedule(c, k, backend=name) for c, k in lps], args.repeat)
        t_day, res = best_of(lambda: run_day(fleet, day, sigma, DayConfig(), 100, backend=name), args.repeat)
        schedules[name] = np.array(sched)
        aggregates[name] = res.after_p2
        rows.append((name, t_lp, t_lp / len(lps) * 1e6, t_day))

    if len(backends) > 1:
        same = all(np.array_equal(schedules[b], schedules[backends[0]]) for b in backends)
        same &= all(np.array_equal(aggregates[b], aggregates[backends[0]]) for b in backends)
        print(f"backends agree bit-for-bit: {same}")
        if not same:
            return 1

    print(f"{'backend':<8} {'LP batch s':>11} {'us per LP':>10} {'run_day s':>10}")
    for name, t_lp, per, t_day in rows:
        print(f"{name:<8} {t_lp:>11.3f} {per:>10.1f} {t_day:>10.3f}")
    if len(rows) > 1:
        base = rows[0]
        for name, t_lp, _, t_day in rows[1:]:
            print(f"speedup {name} vs {base[0]}: LP batch x{base[1] / t_lp:.1f}, run_day x{base[3] / t_day:.1f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
