import ast
import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from instances import extreme_slot_value, new_rng, random_altering, random_shaping
from pevdr.fleet import PevProfile, uncoordinated_schedule
from pevdr.solver import (
    AlteringInput,
    InfeasibleError,
    ShapingInput,
    altering_cost,
    brute_force_oracle,
    check_schedule,
    grid_bound,
    profile_constraints,
    solve_altering,
    solve_lp,
    solve_schedule,
    solve_shaping,
)
from pevdr.solver.kernel import BACKENDS

ZEROS = np.zeros(24)


def _profile_args(cons):
    """Rebuild (arrival, departure, E, p_max, C, SOC) from a constraint set."""
    return (cons.order[0], cons.order[-1], cons.energy, cons.upper, cons.capacity, cons.soc_start)


def shaping(profile, cost, v2g=True, floor=0.2):
    """ShapingInput whose correlation coefficients equal ``cost``."""
    return ShapingInput(np.zeros(24), np.asarray(cost, dtype=float), ZEROS, profile, v2g, floor)


class TestLp:
    def test_against_scipy(self):
        rng = new_rng(1)
        for _ in range(150):
            n = int(rng.integers(1, 8))
            m = int(rng.integers(0, 6))
            c = rng.normal(size=n)
            A = rng.normal(size=(m, n))
            x0 = rng.uniform(-1, 1, size=n)
            b = A @ x0 + rng.uniform(0, 1, size=m)
            Aeq = rng.normal(size=(1, n))
            beq = Aeq @ x0
            lb, ub = np.full(n, -2.0), np.full(n, 2.0)
            ours = solve_lp(c, A, b, Aeq, beq, lb, ub)
            ref = linprog(c, A if m else None, b if m else None, Aeq, beq, bounds=list(zip(lb, ub)), method="highs")
            assert ours.status == "optimal" and ref.status == 0
            assert ours.objective == pytest.approx(ref.fun, abs=1e-7)
            assert np.all(A @ ours.x <= b + 1e-9)

    def test_infeasible(self):
        res = solve_lp([1.0, 1.0], A_eq=[[1.0, 1.0]], b_eq=[5.0], lb=[0, 0], ub=[1, 1])
        assert res.status == "infeasible"

    @pytest.mark.parametrize("backend", sorted(BACKENDS))
    def test_unbounded(self, backend):
        assert solve_lp([-1.0], lb=[0.0], ub=[np.inf], backend=backend).status == "unbounded"
        assert solve_lp([-1.0, 1.0], A_ub=[[1.0, -1.0]], b_ub=[1.0], backend=backend).status == "optimal"
        assert solve_lp([-1.0, 0.0], A_ub=[[1.0, -1.0]], b_ub=[1.0], backend=backend).status == "unbounded"

    def test_secondary_breaks_ties(self):
        res = solve_lp([0.0, 0.0, 0.0], A_eq=[[1, 1, 1]], b_eq=[1.0], lb=[0] * 3, ub=[1] * 3, secondary=[1, 2, 3])
        assert np.array_equal(res.x, [1.0, 0.0, 0.0])


@pytest.mark.skipif("cython" not in BACKENDS, reason="compiled kernel not built")
def test_backends_bit_identical():
    rng = new_rng(2)
    for _ in range(300):
        cost, cons, *_ = random_shaping(rng)
        assert np.array_equal(solve_schedule(cost, cons, backend="python"), solve_schedule(cost, cons, backend="cython"))
        cost, cons, _, _ = random_altering(rng)
        assert np.array_equal(solve_schedule(cost, cons, backend="python"), solve_schedule(cost, cons, backend="cython"))


class TestShaping:
    def test_no_slack_is_forced(self):
        p = PevProfile(20, 23, 7.2)
        x = solve_shaping(shaping(p, new_rng(0).normal(size=24)))
        expected = np.zeros(24)
        expected[19:23] = 1.8
        assert np.array_equal(x, expected)

    def test_zero_need_without_v2g(self):
        x = solve_shaping(shaping(PevProfile(19, 7, 0.0), new_rng(0).normal(size=24), v2g=False))
        assert np.all(x == 0.0)

    def test_three_slot_greedy(self):
        cost = np.zeros(24)
        cost[9:12] = [5.0, 1.0, 3.0]
        p = PevProfile(10, 12, 1.8, soc_at_arrival=10.0, capacity=24.0)
        inp = shaping(p, cost, v2g=False)
        x = solve_shaping(inp)
        assert x[10] == pytest.approx(1.8) and x.sum() == pytest.approx(1.8)
        oracle_x, oracle_v = brute_force_oracle(inp.cost, inp.constraints(), 0.1)
        assert np.allclose(oracle_x, x)

    def test_cost_is_baseline_plus_others_minus_target(self):
        p = PevProfile(19, 7, 10.0)
        inp = ShapingInput(np.full(24, 5.0), np.arange(24.0), np.ones(24), p)
        assert np.array_equal(inp.cost, np.arange(24.0) + 1 - 5)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(0.01, 1000))
    def test_scaling_keeps_argmin(self, seed, scale):
        cost, cons, *_ = random_shaping(new_rng(seed))
        a = solve_schedule(cost, cons)
        b = solve_schedule(cost * scale, cons)
        assert float(cost @ b) == pytest.approx(float(cost @ a), abs=1e-6 * max(1, np.abs(cost).sum()))

    def test_floor_unreachable(self):
        # Arrives nearly empty with the floor above its level and one slow hour.
        p = PevProfile(10, 10, 1.0, power_limit=1.0, capacity=24.0, soc_at_arrival=0.5)
        with pytest.raises(InfeasibleError) as err:
            solve_schedule(ZEROS, profile_constraints(p, True, 0.5))
        assert err.value.constraint == "soc_floor"


class TestAltering:
    def base(self):
        p = PevProfile(18, 6, 10.0)
        committed = solve_schedule(new_rng(4).normal(size=24), profile_constraints(p))
        return p, committed

    def test_prefix_frozen(self):
        p, committed = self.base()
        inp = AlteringInput(shaping(p, new_rng(5).normal(size=24)), 21, committed, 0.3, 1)
        x = solve_altering(inp)
        assert np.array_equal(x[:20], committed[:20])
        assert check_schedule(x, inp.constraints()) == []

    def test_lambda_zero_plus_takes_lowest(self):
        rng = new_rng(9)
        for _ in range(100):
            _, alt_cons, t0, committed = random_altering(rng)
            p = PevProfile(*_profile_args(alt_cons))
            inp = AlteringInput(shaping(p, ZEROS, v2g=alt_cons.lower < 0, floor=alt_cons.soc_floor / p.capacity), t0, committed, 0.0, 1)
            x = solve_altering(inp)
            assert x[t0 - 1] == pytest.approx(extreme_slot_value(inp.constraints(), t0, 1), abs=1e-9)

    def test_lambda_zero_minus_takes_highest(self):
        rng = new_rng(10)
        for _ in range(100):
            _, alt_cons, t0, committed = random_altering(rng)
            p = PevProfile(*_profile_args(alt_cons))
            inp = AlteringInput(shaping(p, ZEROS, v2g=alt_cons.lower < 0, floor=alt_cons.soc_floor / p.capacity), t0, committed, 0.0, -1)
            x = solve_altering(inp)
            assert x[t0 - 1] == pytest.approx(extreme_slot_value(inp.constraints(), t0, -1), abs=1e-9)

    def test_lambda_zero_minus_two_slots_oracle(self):
        p = PevProfile(23, 24, 1.0, soc_at_arrival=20.0)
        inp = AlteringInput(shaping(p, ZEROS), 23, ZEROS, 0.0, -1)
        x = solve_altering(inp)
        oracle_x, _ = brute_force_oracle(inp.cost, inp.constraints(), 0.1)
        assert x[22] == pytest.approx(1.8)
        assert oracle_x[22] == pytest.approx(x[22])

    def test_lambda_one_matches_shaping_on_remaining(self):
        p, committed = self.base()
        c = new_rng(6).normal(size=24)
        inp = AlteringInput(shaping(p, c), 22, committed, 1.0, 1, unit="kWh")
        direct = solve_schedule(c, profile_constraints(p, True, 0.2, 22, committed))
        assert np.array_equal(solve_altering(inp), direct)

    def test_v2g_is_more_flexible(self):
        rng = new_rng(7)
        for _ in range(50):
            a, b = int(rng.integers(1, 13)), int(rng.integers(13, 25))
            p = PevProfile(a, b, float(rng.uniform(0, min(8.0, 1.8 * (b - a + 1)))))
            committed = solve_schedule(rng.normal(size=24), profile_constraints(p, False))
            t0 = int(rng.choice(p.slots))
            with_v2g = solve_altering(AlteringInput(shaping(p, ZEROS, v2g=True), t0, committed, 0.0, 1))
            without = solve_altering(AlteringInput(shaping(p, ZEROS, v2g=False), t0, committed, 0.0, 1))
            assert with_v2g[t0 - 1] <= without[t0 - 1] + 1e-12

    def test_contract_errors(self):
        p, committed = self.base()
        with pytest.raises(ValueError):
            AlteringInput(shaping(p, ZEROS), 22, committed, 1.5, 1)
        with pytest.raises(ValueError):
            AlteringInput(shaping(p, ZEROS), 22, committed, 0.5, 0)
        with pytest.raises(ValueError):
            AlteringInput(shaping(p, ZEROS), 22, committed, 0.5, 1, b_scope="other")

    def test_cost_scopes(self):
        c = np.arange(24.0)
        full = altering_cost(c, 3, 0.25, -1, "full", "kWh")
        inst = altering_cost(c, 3, 0.25, -1, "instantaneous", "kWh")
        expected_full = -(0.25 * c)
        expected_full[2] -= 0.75
        assert np.allclose(full, expected_full)
        expected_inst = 0.25 * c
        expected_inst[2] -= 0.75
        assert np.allclose(inst, expected_inst)
        assert np.allclose(altering_cost(c, 3, 0.25, 1, "full", "MWh"), altering_cost(c / 1000, 3, 0.25, 1, "full", "kWh"))

    def test_objective_consistent_with_cost(self):
        rng = new_rng(8)
        for _ in range(20):
            p = PevProfile(18, 6, 10.0)
            inp = AlteringInput(
                ShapingInput(rng.normal(size=24), rng.normal(size=24), rng.uniform(size=24), p),
                int(rng.choice(p.slots)), uncoordinated_schedule(p), float(rng.uniform()), int(rng.choice([-1, 1])),
                str(rng.choice(["full", "instantaneous"])),
            )
            x1 = solve_schedule(rng.normal(size=24), inp.constraints())
            x2 = solve_schedule(rng.normal(size=24), inp.constraints())
            assert inp.objective(x1) - inp.objective(x2) == pytest.approx(float(inp.cost @ (x1 - x2)), abs=1e-9)


class TestOracle:
    def test_single_slot_forced(self):
        p = PevProfile(5, 5, 1.2)
        x, _ = brute_force_oracle(np.ones(24), profile_constraints(p), 0.1)
        assert x[4] == pytest.approx(1.2)

    def test_guard(self):
        with pytest.raises(ValueError):
            brute_force_oracle(ZEROS, profile_constraints(PevProfile(1, 6, 1.0)), 0.1)
        with pytest.raises(ValueError):
            brute_force_oracle(ZEROS, profile_constraints(PevProfile(1, 2, 1.0)), 0.05)

    def test_agrees_on_infeasibility(self):
        p = PevProfile(10, 10, 1.0, power_limit=1.0, soc_at_arrival=0.5)
        cons = profile_constraints(p, True, 0.5)
        with pytest.raises(InfeasibleError):
            brute_force_oracle(ZEROS, cons, 0.1)
        with pytest.raises(InfeasibleError):
            solve_schedule(ZEROS, cons)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_two_slot_bound(self, seed):
        cost, cons, *_ = random_shaping(new_rng(seed), max_len=2)
        x = solve_schedule(cost, cons)
        _, value = brute_force_oracle(cost, cons, 0.1)
        assert float(cost @ x) <= value + grid_bound(cost, 0.1) + 1e-9
        assert float(cost @ x) <= value + 1e-6


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_feasibility_property(seed):
    rng = new_rng(seed)
    cost, cons, *_ = random_shaping(rng)
    assert check_schedule(solve_schedule(cost, cons), cons) == []
    cost, cons, _, _ = random_altering(rng)
    assert check_schedule(solve_schedule(cost, cons), cons) == []


def test_retailer_side_never_sees_profiles():
    """The retailer module imports no fleet types and takes only vectors."""
    import pevdr.coordinator.retailer as retailer

    tree = ast.parse(open(retailer.__file__).read())
    imported = set()
    for node in ast.walk(tree):
        if isinstance(node, ast.ImportFrom):
            imported.add(node.module or "")
            imported.update(a.name for a in node.names)
        elif isinstance(node, ast.Import):
            imported.update(a.name for a in node.names)
        elif isinstance(node, ast.Attribute):
            assert node.attr not in ("profile", "arrival", "departure", "energy_need", "capacity", "soc_at_arrival")
    assert not any("fleet" in name or "PevProfile" in name for name in imported)
    assert os.path.basename(retailer.__file__) == "retailer.py"
