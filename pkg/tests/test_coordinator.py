import numpy as np
import pytest

from pevdr.coordinator import (
    ConvergenceConfig,
    DayConfig,
    FleetState,
    HorizonError,
    Retailer,
    UserAgent,
    UserInfeasibleError,
    decide_altering,
    offline_shape,
    online_step,
    run_day,
    run_horizon,
    sweep_mse,
    tracking_potential,
)
from pevdr.fleet import FleetConfig, Household, PevProfile, synthesize_fleet
from pevdr.prices import DayPrices, HourlyStd, MarketKind, PriceMatrix, ThresholdConfig, hourly_std
from pevdr.solver import InfeasibleError, check_schedule, profile_constraints
from pevdr.synthetic import synthetic_prices

PRICES = synthetic_prices(seed=7, days=20, spike_day=5)
SIGMA = hourly_std(PRICES.rt)


def fleet(n=6, seed=3):
    return synthesize_fleet(FleetConfig(n_users=n), seed)


def day_prices(d=5):
    return DayPrices.from_matrices(PRICES.da, PRICES.rt, d)


def assert_feasible(state, t0=None, committed=None):
    for i, (_, profile, schedule) in enumerate(state.users):
        if profile is None:
            assert np.all(schedule == 0)
            continue
        extra = () if t0 is None else (t0, committed[i])
        cons = profile_constraints(profile, True, 0.2, *extra)
        assert check_schedule(schedule, cons) == [], i


class TestRetailer:
    def test_signal_excludes_own_load(self):
        r = Retailer([np.ones(24), 2 * np.ones(24), 4 * np.ones(24)], np.full(24, 3.0))
        assert np.array_equal(r.signal(1), np.full(24, 2.0))

    def test_incremental_aggregate(self):
        rng = np.random.default_rng(0)
        r = Retailer([rng.uniform(size=24) for _ in range(5)], np.zeros(24))
        for _ in range(200):
            r.update(int(rng.integers(5)), rng.uniform(-2, 2, 24))
        assert r.drift() < 1e-12
        r.resync()
        assert r.drift() == 0

    def test_target_shape(self):
        with pytest.raises(ValueError):
            Retailer([np.zeros(24)], np.zeros(3))

    def test_potential_and_mse(self):
        assert tracking_potential([1.0, 2.0], [1.0, 0.0]) == pytest.approx(1 - 2 + 4)
        assert sweep_mse(np.zeros(4), np.array([2.0, 0, 0, 0])) == 1.0

    def test_decide_uses_threshold(self):
        rt = np.full(24, 10.0)
        rt[8] = 100.0
        day = DayPrices(np.zeros(24), rt, np.full(24, 10.0))
        gamma, b = decide_altering(day, HourlyStd(np.ones(24)), ThresholdConfig(3), 9)
        assert gamma == pytest.approx(130.0 / 3) and b == 1
        gamma, b = decide_altering(day, HourlyStd(np.ones(24)), ThresholdConfig(3), 5)
        assert b == -1


class TestOffline:
    def test_aggregate_matches_schedules(self):
        users = fleet()
        state0 = FleetState.initial(users)
        state, trace = offline_shape(state0, np.full(24, 3.0))
        total = sum(h.baseline + s for h, _, s in state.users)
        assert np.allclose(state.aggregate, total, atol=1e-9, rtol=0)
        assert_feasible(state)
        assert len(trace.potentials) == 1 + len(users) * len(trace.mse)

    def test_input_fleet_untouched(self):
        state0 = FleetState.initial(fleet())
        before = [s.copy() for _, _, s in state0.users]
        offline_shape(state0, np.zeros(24))
        assert all(np.array_equal(a, s) for a, (_, _, s) in zip(before, state0.users))

    def test_single_user_fixed_point(self):
        state0 = FleetState.initial(fleet(1))
        _, trace = offline_shape(state0, np.full(24, 2.0))
        assert trace.mse[1] == 0.0 and trace.converged

    def test_deterministic(self):
        state0 = FleetState.initial(fleet())
        a, ta = offline_shape(state0, np.full(24, 3.0))
        b, tb = offline_shape(state0, np.full(24, 3.0))
        assert np.array_equal(a.aggregate, b.aggregate)
        assert ta.mse == tb.mse

    def test_jacobi(self):
        cfg = ConvergenceConfig(max_sweeps=3, sweep_mode="jacobi")
        state, trace = offline_shape(FleetState.initial(fleet()), np.full(24, 3.0), cfg)
        assert trace.mode == "jacobi" and 1 <= len(trace.mse) <= 3
        assert_feasible(state)

    def test_households_only(self):
        users = [(h, None) for h, _ in fleet(3)]
        state, trace = offline_shape(FleetState.initial(users), np.zeros(24))
        assert np.array_equal(state.aggregate, sum(h.baseline for h, _ in users))
        assert trace.mse == [0.0]

    def test_infeasible_user_is_named(self, monkeypatch):
        def fail(self, signal, backend=None):
            raise InfeasibleError("soc_floor")

        monkeypatch.setattr(UserAgent, "shape", fail)
        with pytest.raises(UserInfeasibleError) as err:
            offline_shape(FleetState.initial(fleet(2)), np.zeros(24))
        assert err.value.user == 0 and err.value.constraint == "soc_floor"

    @pytest.mark.parametrize("kwargs", [{"max_sweeps": 0}, {"mse_tolerance": 0.0}, {"sweep_mode": "random"}])
    def test_config_ranges(self, kwargs):
        with pytest.raises(ValueError):
            ConvergenceConfig(**kwargs)


class TestOnline:
    def shaped(self, n=6):
        state, _ = offline_shape(FleetState.initial(fleet(n)), np.full(24, 3.0 * n / 6))
        return state

    def spike_day(self):
        rt = np.full(24, 30.0)
        rt[8] = 300.0
        return DayPrices(np.full(24, 30.0), rt, np.full(24, 30.0)), HourlyStd(np.ones(24))

    def test_causal(self):
        state = self.shaped()
        day, sigma = self.spike_day()
        new, event = online_step(state, day, sigma, ThresholdConfig(3), 9, 0.5)
        assert event.b_sign == 1 and event.sweeps_run >= 1
        committed = [s for _, _, s in state.users]
        for old, (_, _, s) in zip(committed, new.users):
            assert np.array_equal(old[:8], s[:8])
        assert_feasible(new, 9, committed)
        assert event.load_after == pytest.approx(new.aggregate[8])
        assert event.load_after < event.load_before

    def test_no_trigger(self):
        state = self.shaped()
        day = DayPrices(np.full(24, 30.0), np.full(24, 30.0), np.full(24, 30.0))
        new, event = online_step(state, day, HourlyStd(np.ones(24)), ThresholdConfig(3, 50.0), 9, 0.5)
        assert event.b_sign is None and event.sweeps_run == 0 and new is state

    def test_lambda_one_logs_without_altering(self):
        state = self.shaped()
        day, sigma = self.spike_day()
        new, event = online_step(state, day, sigma, ThresholdConfig(3), 9, 1.0)
        assert event.b_sign == 1 and event.sweeps_run == 0
        assert np.array_equal(new.aggregate, state.aggregate)

    def test_skip_infeasible_keeps_schedule(self, monkeypatch):
        state = self.shaped(3)
        day, sigma = self.spike_day()
        stuck = state.agents[1].household  # agent copies share the household object
        real_alter = UserAgent.alter

        def alter(self, *args, **kwargs):
            if self.household is stuck:
                raise InfeasibleError("soc_floor")
            return real_alter(self, *args, **kwargs)

        monkeypatch.setattr(UserAgent, "alter", alter)
        new, event = online_step(state, day, sigma, ThresholdConfig(3), 9, 0.5)
        assert event.skipped_users == (1,)
        assert np.array_equal(new.users[1][2], state.users[1][2])

    @pytest.mark.parametrize("kwargs", [{"lam": 1.5}, {"b_scope": "x"}, {"unit": "GWh"}])
    def test_argument_ranges(self, kwargs):
        day, sigma = self.spike_day()
        args = {"lam": 0.5} | kwargs
        lam = args.pop("lam")
        with pytest.raises(ValueError):
            online_step(self.shaped(1), day, sigma, ThresholdConfig(3), 9, lam, **args)


class TestRunDay:
    def test_columns_and_shapes(self):
        result = run_day(fleet(), day_prices(), SIGMA, clearing_seed=[1, 5])
        assert len(result.events) == 24
        for series in (result.target_da, result.uncoordinated, result.after_p1, result.after_p2):
            assert series.shape == (24,)
        assert result.report.after_p2 == result.ledgers["after_p2"].total_cost

    def test_deterministic(self):
        a = run_day(fleet(), day_prices(), SIGMA, clearing_seed=[1, 5])
        b = run_day(fleet(), day_prices(), SIGMA, clearing_seed=[1, 5])
        assert np.array_equal(a.after_p2, b.after_p2) and a.report == b.report

    def test_lambda_one_keeps_shaping(self):
        result = run_day(fleet(), day_prices(), SIGMA, DayConfig(lam=1.0), clearing_seed=2)
        assert np.array_equal(result.after_p1, result.after_p2)
        assert result.report.after_p1 == result.report.after_p2

    def test_no_pevs(self):
        users = [(h, None) for h, _ in fleet()]
        result = run_day(users, day_prices(), SIGMA, clearing_seed=2)
        assert result.report.after_p1 is None and result.report.after_p2 is None
        assert result.events == []

    def test_empty_fleet(self):
        result = run_day([], day_prices(), SIGMA)
        assert result.report.ideal == 0 and result.report.real_uncoordinated == 0

    def test_energy_conserved(self):
        users = fleet()
        result = run_day(users, day_prices(), SIGMA, clearing_seed=3)
        total = sum(h.baseline.sum() + p.energy_need for h, p in users)
        for series in (result.uncoordinated, result.after_p1, result.after_p2):
            assert series.sum() == pytest.approx(total, abs=1e-7)


class TestHorizon:
    def users_for_day(self, d):
        return synthesize_fleet(FleetConfig(n_users=4), [0, d])

    def test_single_day_equals_run_day(self):
        report = run_horizon(self.users_for_day, PRICES.da, PRICES.rt, days=[5], clearing_seed=9)
        direct = run_day(self.users_for_day(5), day_prices(5), SIGMA, clearing_seed=[9, 5])
        assert report.daily == [direct.report] and report.total == direct.report

    def test_additive(self):
        report = run_horizon(self.users_for_day, PRICES.da, PRICES.rt, days=[1, 2, 3], clearing_seed=9)
        for col in ("ideal", "real_uncoordinated", "after_p1", "after_p2"):
            assert getattr(report.total, col) == sum(getattr(r, col) for r in report.daily)
        assert sorted(report.events) == [1, 2, 3]

    def test_error_names_day(self):
        with pytest.raises(HorizonError) as err:
            run_horizon(self.users_for_day, PRICES.da, PRICES.rt, days=[1, 99])
        assert err.value.day == 99

    def test_mismatched_prices(self):
        short = PriceMatrix(MarketKind.RT, PRICES.rt.values[:3])
        with pytest.raises(ValueError):
            run_horizon(self.users_for_day, PRICES.da, short)


def test_single_household_profile_untouched_by_protocol():
    household = Household(np.full(24, 0.5))
    profile = PevProfile(19, 7, 10.0)
    state, _ = offline_shape(FleetState.initial([(household, profile)]), np.full(24, 1.0))
    assert state.agents[0].profile is profile
