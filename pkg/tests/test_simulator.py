import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iga.dynamics import CenterLocation, Regime, classify, conserved_quantity, period, unconstrained_state
from iga.game import Game, StrategyPair, projected_gradient, value_col, value_row
from iga.nash import enumerate_nash, is_nash
from iga.simulator import (
    CSV_HEADER,
    SCHEDULES,
    Mode,
    PowerSchedule,
    SimConfig,
    SimulationBlowupError,
    Trajectory,
    Verdict,
    average_payoffs,
    run,
    schedule_steps,
    step_finite,
    step_iga,
    sweep,
)

from conftest import games, random_game_array


class TestSteppers:
    def test_iga_center_fixed(self, mp):
        assert step_iga(mp, StrategyPair(0.5, 0.5), 0.3).as_tuple() == (0.5, 0.5)

    def test_iga_pd(self, pd):
        assert step_iga(pd, StrategyPair(0.5, 0.5), 0.1).as_tuple() == pytest.approx((0.35, 0.35))
        assert step_iga(pd, StrategyPair(0, 0), 0.1).as_tuple() == (0, 0)

    def test_iga_rejects_bad_dt(self, pd):
        with pytest.raises(ValueError):
            step_iga(pd, StrategyPair(0.5, 0.5), 0.0)

    def test_schedule_values(self):
        sched = PowerSchedule()
        assert sched(1) == 1
        assert sched(8) == pytest.approx(0.25)
        assert sched.steps(8)[-1] == pytest.approx(0.25)

    def test_finite_step_uses_schedule(self, pd):
        s = StrategyPair(0.9, 0.9)
        g = projected_gradient(pd, s)
        nxt = step_finite(pd, s, 8)
        assert nxt.as_tuple() == pytest.approx((0.9 + 0.25 * g.d_alpha, 0.9 + 0.25 * g.d_beta))

    @pytest.mark.parametrize("k", [1, 2, 10, 1000])
    def test_finite_fixed_point(self, mp, k):
        assert step_finite(mp, StrategyPair(0.5, 0.5), k).as_tuple() == (0.5, 0.5)

    def test_finite_rejects_k0(self, pd):
        with pytest.raises(ValueError):
            step_finite(pd, StrategyPair(0.5, 0.5), 0)

    def test_bad_schedules_rejected(self):
        with pytest.raises(ValueError):
            schedule_steps(lambda k: float(k), 5)
        with pytest.raises(ValueError):
            PowerSchedule(exponent=1.5)

    @settings(max_examples=100, deadline=None)
    @given(games, st.floats(0, 1), st.floats(0, 1), st.sampled_from([Mode.IGA_EULER, Mode.FINITE_STEP]))
    def test_kernel_matches_python_steppers(self, g, a, b, mode):
        cfg = SimConfig(mode=mode, dt=1e-2, max_steps=20, record_every=1, window=2)
        traj, _ = run(g, StrategyPair(a, b), cfg)
        s = StrategyPair(a, b)
        for k in range(1, 21):
            s = step_iga(g, s, cfg.dt) if mode is Mode.IGA_EULER else step_finite(g, s, k)
            row = traj.data[k]
            assert (row[2], row[3]) == pytest.approx(s.as_tuple(), abs=1e-12)


class TestConfig:
    @pytest.mark.parametrize("kwargs", [
        {"dt": 0}, {"dt": -1}, {"conv_tol": 0}, {"window": 1}, {"max_steps": 10, "window": 20},
        {"record_every": 0},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            SimConfig(**kwargs)


class TestRun:
    def test_pd_converges(self, pd):
        _, s = run(pd, StrategyPair(0.9, 0.9), SimConfig(dt=1e-3, max_steps=100_000))
        assert s.verdict is Verdict.CONVERGED_TO_POINT
        assert s.final_strategy.as_tuple() == (0, 0)
        assert s.avg_payoffs == pytest.approx((1, 1), abs=0.05)
        assert s.nash_payoff_distance < 0.05

    def test_matching_pennies_cycles(self, mp):
        _, s = run(mp, StrategyPair(0.5, 0.6), SimConfig())
        assert s.verdict is Verdict.LIMIT_CYCLE_DETECTED
        assert s.avg_payoffs == pytest.approx((0, 0), abs=0.01)

    def test_start_at_nash_corner_converges_immediately(self, coord):
        for p in enumerate_nash(coord).points:
            if projected_gradient(coord, p.strategy).norm() == 0:
                _, s = run(coord, p.strategy)
                assert s.verdict is Verdict.CONVERGED_TO_POINT
                assert s.steps_used <= SimConfig().window

    def test_finite_matching_pennies(self, mp):
        _, s = run(mp, StrategyPair(0.5, 0.6), SimConfig(mode=Mode.FINITE_STEP))
        assert s.nash_payoff_distance < 0.01

    def test_no_cycle_outside_imaginary_regime(self, pd, coord):
        for g in (pd, coord):
            for start in [(0.5, 0.5), (0.9, 0.2)]:
                _, s = run(g, StrategyPair(*start), SimConfig(max_steps=20_000))
                assert s.verdict is not Verdict.LIMIT_CYCLE_DETECTED

    def test_blowup_is_reported(self):
        huge = Game(1e308, 1e308, 1e308, 1e308, 0, 0, 0, 0)
        with pytest.raises(SimulationBlowupError):
            run(huge, StrategyPair(0.5, 0.5), SimConfig(max_steps=100))

    def test_feasibility_both_modes(self):
        rng = np.random.default_rng(41)
        for row in random_game_array(42, 60):
            g = Game(*(4 * row))
            for mode in Mode:
                traj, _ = run(g, StrategyPair(*rng.uniform(0, 1, 2)),
                              SimConfig(mode=mode, dt=1e-2, max_steps=5000, record_every=1))
                a, b = traj.column("alpha"), traj.column("beta")
                assert a.min() >= 0 and a.max() <= 1 and b.min() >= 0 and b.max() <= 1

    def test_monotone_when_gradient_signs_are_fixed(self, pd):
        for mode in Mode:
            traj, _ = run(pd, StrategyPair(0.95, 0.7), SimConfig(mode=mode, dt=1e-3, max_steps=5000, record_every=1))
            assert np.all(np.diff(traj.column("alpha")) <= 0)
            assert np.all(np.diff(traj.column("beta")) <= 0)

    def test_converged_runs_are_nash(self):
        rng = np.random.default_rng(43)
        cfg = SimConfig(max_steps=50_000, record_every=50_000)
        for row in random_game_array(44, 100):
            g = Game(*row)
            _, s = run(g, StrategyPair(*rng.uniform(0, 1, 2)), cfg)
            if s.verdict is Verdict.CONVERGED_TO_POINT:
                assert projected_gradient(g, s.final_strategy).norm() < cfg.conv_tol
                assert is_nash(g, s.final_strategy, 10 * cfg.conv_tol)

    def test_euler_tracks_closed_form_over_one_period(self):
        checked = 0
        rng = np.random.default_rng(45)
        for row in random_game_array(46, 200):
            g = Game(*row)
            c = classify(g)
            if c.regime is not Regime.IMAGINARY_EIGEN or c.center_location is not CenterLocation.INTERIOR:
                continue
            # start on an ellipse well inside the square
            a0 = c.center[0] + rng.uniform(-0.5, 0.5) * min(c.center[0], 1 - c.center[0])
            start = (a0, c.center[1])
            P = period(g)
            dt = 1e-5
            n = int(round(P / dt))
            cfg = SimConfig(dt=P / n, max_steps=n, record_every=max(1, n // 50), window=2)
            traj, _ = run(g, StrategyPair(*start), cfg)
            for row_ in traj.data:
                exact = unconstrained_state(g, start, row_[1])
                assert max(abs(row_[2] - exact[0]), abs(row_[3] - exact[1])) < 1e-3
            q0 = conserved_quantity(g, start)
            q1 = conserved_quantity(g, (traj.data[-1, 2], traj.data[-1, 3]))
            assert abs(q1 - q0) < 1e-3 * q0
            checked += 1
            if checked == 5:
                break
        assert checked == 5

    def test_longer_runs_do_not_get_worse(self, pd, mp, coord, flat_row):
        for g in (pd, mp, coord, flat_row):
            for mode in Mode:
                start = StrategyPair(0.8, 0.3)
                _, short = run(g, start, SimConfig(mode=mode, max_steps=50_000, record_every=50_000))
                _, long = run(g, start, SimConfig(mode=mode, max_steps=100_000, record_every=100_000))
                assert long.nash_payoff_distance <= short.nash_payoff_distance + 1e-3


class TestAverages:
    def test_constant_trajectory(self, coord):
        s = StrategyPair(0.3, 0.6)
        traj = Trajectory.from_states(coord, [0, 1, 2], [0.3] * 3, [0.6] * 3)
        assert average_payoffs(traj) == pytest.approx((value_row(coord, s), value_col(coord, s)))

    def test_one_period_of_matching_pennies_averages_to_center(self, mp):
        P = period(mp)
        ts = np.linspace(0, P, 20001)
        states = [unconstrained_state(mp, (0.5, 0.6), t) for t in ts]
        traj = Trajectory.from_states(mp, ts, [x for x, _ in states], [y for _, y in states])
        assert average_payoffs(traj) == pytest.approx((0, 0), abs=1e-6)

    def test_two_samples_mean(self):
        # row payoff 0 at (0, 1) and 2 at (1, 1)
        g = Game.from_matrices([[2, 0], [0, 0]], [[0, 0], [0, 0]])
        for weighted in (True, False):
            traj = Trajectory.from_states(g, [0.0, 1.0], [0.0, 1.0], [1.0, 1.0], time_weighted=weighted)
            assert average_payoffs(traj)[0] == pytest.approx(1)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            average_payoffs(Trajectory(np.empty((0, len(CSV_HEADER)))))

    def test_time_weighted_average_matches_trapezoid(self, coord):
        traj, _ = run(coord, StrategyPair(0.9, 0.2), SimConfig(dt=1e-2, max_steps=500, record_every=1, window=2))
        t, v = traj.column("time"), traj.column("v_row")
        expect = np.sum(0.5 * np.diff(t) * (v[1:] + v[:-1])) / t[-1]
        assert average_payoffs(traj)[0] == pytest.approx(expect, rel=1e-10)

    def test_step_average_matches_mean(self, coord):
        cfg = SimConfig(mode=Mode.FINITE_STEP, max_steps=300, record_every=1, window=2)
        traj, _ = run(coord, StrategyPair(0.9, 0.2), cfg)
        assert average_payoffs(traj)[1] == pytest.approx(traj.column("v_col").mean(), rel=1e-10)


class TestCsv:
    def test_round_trip(self, tmp_path, mp):
        traj, _ = run(mp, StrategyPair(0.5, 0.6), SimConfig(max_steps=2000, record_every=10))
        path = tmp_path / "t.csv"
        traj.write_csv(path)
        assert path.read_text().splitlines()[0] == ",".join(CSV_HEADER)
        again = Trajectory.read_csv(path)
        assert np.array_equal(again.data, traj.data)


class TestSweep:
    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            sweep(0, 0)

    def test_deterministic_and_order_independent(self):
        cfg = SimConfig(max_steps=5000)
        one = sweep(7, 20, cfg).to_json()
        assert sweep(7, 20, cfg).to_json() == one
        assert sweep(7, 20, cfg, workers=3).to_json() == one

    def test_report_contents(self):
        report = sweep(3, 10, SimConfig(max_steps=5000)).to_dict()
        assert report["n_games"] == 10
        assert sum(report["regime_counts"].values()) == 10
        assert sum(report["verdict_counts"].values()) == 50
        assert report["worst"][0]["nash_payoff_distance"] == report["max_nash_payoff_distance"]
