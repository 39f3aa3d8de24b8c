"""Random single-user scheduling instances shared by solver and acceptance tests."""

import numpy as np

from pevdr.fleet import PevProfile
from pevdr.prices import wrap_hour
from pevdr.solver import B_SCOPES, OBJECTIVE_UNITS, altering_cost, profile_constraints, solve_schedule


def random_profile(rng, max_len=24):
    arrival = int(rng.integers(1, 25))
    length = int(rng.integers(1, max_len + 1))
    p_max = float(rng.choice([1.8, 3.3, 7.2]))
    capacity = float(rng.choice([24.0, 30.0, 40.0]))
    top = min(p_max * length, capacity, 24.0)
    energy = float(rng.choice([0.0, top, rng.uniform(0.0, top)], p=[0.1, 0.15, 0.75]))
    return PevProfile(arrival, wrap_hour(arrival + length - 1), energy, p_max, capacity)


def random_shaping(rng, max_len=24):
    """(cost, constraints, profile, v2g, floor) for a feasible shaping problem."""
    profile = random_profile(rng, max_len)
    v2g = bool(rng.integers(0, 2))
    floor = float(rng.uniform(0.0, min(0.5, profile.soc_at_arrival / profile.capacity)))
    cost = rng.normal(0.0, 30.0, size=24) + rng.uniform(0.0, 3.0, size=24)
    return cost, profile_constraints(profile, v2g, floor), profile, v2g, floor


def random_altering(rng, max_len=24, max_free=None):
    """An altering problem whose frozen prefix comes from an earlier shaping solve."""
    while True:
        shaping_cost, cons, profile, v2g, floor = random_shaping(rng, max_len)
        committed = solve_schedule(rng.normal(0.0, 30.0, size=24), cons)
        t0 = int(rng.choice(profile.slots))
        alt = profile_constraints(profile, v2g, floor, t0, committed)
        if max_free is None or len(alt.free) <= max_free:
            break
    cost = altering_cost(
        shaping_cost,
        t0,
        float(rng.choice([0.0, 1.0, rng.uniform()])),
        int(rng.choice([-1, 1])),
        str(rng.choice(B_SCOPES)),
        str(rng.choice(list(OBJECTIVE_UNITS))),
    )
    return cost, alt, t0, committed


def extreme_slot_value(cons, t0, sense):
    """Lowest (sense=+1) or highest (sense=-1) feasible value of hour ``t0``.

    Builds the SOC rows directly from ``cons`` and solves with scipy, so it
    shares nothing with the in-repo simplex.
    """
    from scipy.optimize import linprog

    order = list(cons.order)
    n = len(order)
    bounds = []
    for s in order:
        if s in cons.frozen:
            bounds.append((cons.committed[s - 1], cons.committed[s - 1]))
        else:
            bounds.append((cons.lower, cons.upper))
    prefix = np.tril(np.ones((n, n)))
    A_ub = np.vstack([prefix, -prefix])
    b_ub = np.concatenate([np.full(n, cons.capacity - cons.soc_start), np.full(n, cons.soc_start - cons.soc_floor)])
    c = np.zeros(n)
    c[order.index(t0)] = sense
    res = linprog(c, A_ub, b_ub, np.ones((1, n)), [cons.energy], bounds=bounds, method="highs")
    assert res.status == 0
    return sense * res.fun


def new_rng(seed):
    return np.random.Generator(np.random.PCG64(seed))
