"""Simulation of projected gradient ascent in 2x2 games.

Two steppers are provided: small fixed-step forward Euler approximating the
continuous (infinitesimal step) flow, and finite gradient ascent with a
decreasing step-size schedule. Both clamp to the unit square after each
projected step and track running average payoffs, which is the quantity
whose convergence to a Nash payoff pair is being checked.
"""

from __future__ import annotations

import csv
import enum
import json
import math
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterator, NamedTuple, Optional, Sequence

import numpy as np

from . import _kernel
from .dynamics import Regime, classify, period
from .game import Game, StrategyPair, projected_gradient, value_col, value_row
from .nash import enumerate_nash, nearest_nash_payoff_distance, nearest_nash_strategy_distance

CSV_HEADER = ("step", "time", "alpha", "beta", "v_row", "v_col", "avg_row", "avg_col")

STANDARD_STARTS: tuple[StrategyPair, ...] = (
    StrategyPair(0.05, 0.05),
    StrategyPair(0.05, 0.95),
    StrategyPair(0.95, 0.05),
    StrategyPair(0.95, 0.95),
    StrategyPair(0.5, 0.5),
)


class SimulationBlowupError(RuntimeError):
    """The state stopped being finite, which the bounded projected flow rules out."""


class Mode(str, enum.Enum):
    IGA_EULER = "IGA_Euler"
    FINITE_STEP = "FiniteStep"


class Verdict(str, enum.Enum):
    CONVERGED_TO_POINT = "ConvergedToPoint"
    LIMIT_CYCLE_DETECTED = "LimitCycleDetected"
    UNDECIDED = "Undecided"


@dataclass(frozen=True)
class PowerSchedule:
    """Step sizes ``scale * k ** -exponent``."""

    exponent: float = 2.0 / 3.0
    scale: float = 1.0

    def __post_init__(self) -> None:
        if not (0.0 < self.exponent <= 1.0) or self.scale <= 0.0:
            raise ValueError("need 0 < exponent <= 1 and scale > 0 for a decreasing, non-summable schedule")

    def __call__(self, k: int) -> float:
        return self.scale * k ** -self.exponent

    def steps(self, n: int) -> np.ndarray:
        return self.scale * np.arange(1, n + 1, dtype=float) ** -self.exponent

    @property
    def name(self) -> str:
        return f"{self.scale:g}*k^-{self.exponent:g}"


SCHEDULES: dict[str, PowerSchedule] = {
    "k^-2/3": PowerSchedule(2.0 / 3.0),
    "k^-1/2": PowerSchedule(0.5),
    "k^-3/4": PowerSchedule(0.75),
    "k^-1": PowerSchedule(1.0),
}

Schedule = Callable[[int], float]


def schedule_steps(schedule: Schedule, n: int) -> np.ndarray:
    if hasattr(schedule, "steps"):
        h = np.asarray(schedule.steps(n), dtype=float)
    else:
        h = np.array([schedule(k) for k in range(1, n + 1)], dtype=float)
    if n and (not np.all(np.isfinite(h)) or np.any(h <= 0.0) or np.any(np.diff(h) > 0.0)):
        raise ValueError("step-size schedule must be finite, positive and non-increasing")
    return h


@dataclass(frozen=True)
class SimConfig:
    mode: Mode = Mode.IGA_EULER
    dt: float = 1e-4
    schedule: Schedule = field(default_factory=PowerSchedule)
    max_steps: int = 200_000
    record_every: int = 100
    conv_tol: float = 1e-3
    window: int = 100
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", Mode(self.mode))
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.conv_tol > 0:
            raise ValueError(f"conv_tol must be positive, got {self.conv_tol}")
        if self.window < 2 or self.max_steps < self.window:
            raise ValueError("need max_steps >= window >= 2")
        if self.record_every < 1:
            raise ValueError("record_every must be at least 1")

    def step_sizes(self) -> np.ndarray:
        if self.mode is Mode.IGA_EULER:
            return np.full(self.max_steps, self.dt)
        return schedule_steps(self.schedule, self.max_steps)

    def to_dict(self) -> dict[str, Any]:
        sched = getattr(self.schedule, "name", repr(self.schedule))
        return {"mode": self.mode.value, "dt": self.dt, "schedule": sched,
                "max_steps": self.max_steps, "record_every": self.record_every,
                "conv_tol": self.conv_tol, "window": self.window, "seed": self.seed}


class Sample(NamedTuple):
    step: int
    time: float
    alpha: float
    beta: float
    v_row: float
    v_col: float
    avg_row: float
    avg_col: float


class Trajectory:
    """Recorded samples of a run, stored column-wise (one row per sample)."""

    def __init__(self, data: np.ndarray, time_weighted: bool = True):
        data = np.asarray(data, dtype=float)
        if data.ndim != 2 or data.shape[1] != len(CSV_HEADER):
            raise ValueError(f"expected an (n, {len(CSV_HEADER)}) array")
        self.data = data
        self.time_weighted = time_weighted

    @classmethod
    def from_states(cls, game: Game, times: Sequence[float], alphas: Sequence[float],
                    betas: Sequence[float], time_weighted: bool = True) -> "Trajectory":
        """Build a trajectory from given states, accumulating averages.

        Time weighting uses the trapezoidal rule; otherwise each state counts
        once.
        """
        t = np.asarray(times, dtype=float)
        a = np.asarray(alphas, dtype=float)
        b = np.asarray(betas, dtype=float)
        vr = np.array([value_row(game, StrategyPair(x, y)) for x, y in zip(a, b)])
        vc = np.array([value_col(game, StrategyPair(x, y)) for x, y in zip(a, b)])
        if time_weighted:
            def running(v: np.ndarray) -> np.ndarray:
                area = np.concatenate([[0.0], np.cumsum(0.5 * np.diff(t) * (v[1:] + v[:-1]))])
                span = t - t[0]
                out = np.empty_like(v)
                out[0] = v[0]
                out[1:] = area[1:] / span[1:]
                return out
        else:
            def running(v: np.ndarray) -> np.ndarray:
                return np.cumsum(v) / np.arange(1, len(v) + 1)
        steps = np.arange(len(t), dtype=float)
        return cls(np.column_stack([steps, t, a, b, vr, vc, running(vr), running(vc)]), time_weighted)

    def __len__(self) -> int:
        return self.data.shape[0]

    def __iter__(self) -> Iterator[Sample]:
        return iter(self.samples)

    @property
    def samples(self) -> list[Sample]:
        return [Sample(int(r[0]), *map(float, r[1:])) for r in self.data]

    def column(self, name: str) -> np.ndarray:
        return self.data[:, CSV_HEADER.index(name)]

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_HEADER)
            for r in self.data:
                writer.writerow([str(int(r[0]))] + [repr(float(x)) for x in r[1:]])

    @classmethod
    def read_csv(cls, path: str | Path, time_weighted: bool = True) -> "Trajectory":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if tuple(header) != CSV_HEADER:
                raise ValueError(f"unexpected CSV header {header}")
            rows = [[float(x) for x in row] for row in reader]
        return cls(np.array(rows, dtype=float).reshape(-1, len(CSV_HEADER)), time_weighted)


@dataclass(frozen=True)
class RunSummary:
    verdict: Verdict
    final_strategy: StrategyPair
    avg_payoffs: tuple[float, float]
    nash_payoff_distance: float
    nash_strategy_distance: float
    steps_used: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "verdict": self.verdict.value,
            "final_strategy": list(self.final_strategy.as_tuple()),
            "avg_payoffs": list(self.avg_payoffs),
            "nash_payoff_distance": self.nash_payoff_distance,
            "nash_strategy_distance": self.nash_strategy_distance,
            "steps_used": self.steps_used,
        }


def step_iga(game: Game, s: StrategyPair, dt: float) -> StrategyPair:
    """One forward-Euler step of the projected gradient flow."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    g = projected_gradient(game, s)
    return StrategyPair(min(1.0, max(0.0, s.alpha + dt * g.d_alpha)),
                        min(1.0, max(0.0, s.beta + dt * g.d_beta)))


def step_finite(game: Game, s: StrategyPair, k: int, schedule: Schedule = PowerSchedule()) -> StrategyPair:
    """Gradient ascent step number ``k`` (1-based) with step size ``schedule(k)``."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    eta = schedule(k)
    g = projected_gradient(game, s)
    return StrategyPair(min(1.0, max(0.0, s.alpha + eta * g.d_alpha)),
                        min(1.0, max(0.0, s.beta + eta * g.d_beta)))


def _simulate(game: Game, start: StrategyPair, cfg: SimConfig, h: np.ndarray, record: bool = True):
    cls = classify(game)
    detect_cycle = cls.regime is Regime.IMAGINARY_EIGEN
    spacing = period(game) / 4.0 if detect_cycle else math.inf
    record_every = cfg.record_every if record else cfg.max_steps
    rec = np.empty((cfg.max_steps // record_every + 2, len(CSV_HEADER)))
    status, nrec, steps_used, _drift, _loops = _kernel.integrate(
        np.array(game.entries), start.alpha, start.beta, h,
        cfg.mode is Mode.IGA_EULER, record_every, cfg.conv_tol, cfg.window,
        detect_cycle, 4.0 * cfg.conv_tol, spacing, rec)
    if status == _kernel.BLOWUP:
        raise SimulationBlowupError(f"non-finite state at step {steps_used} from {start}")
    traj = Trajectory(rec[:nrec].copy(), cfg.mode is Mode.IGA_EULER)
    verdict = {_kernel.CONVERGED: Verdict.CONVERGED_TO_POINT,
               _kernel.LIMIT_CYCLE: Verdict.LIMIT_CYCLE_DETECTED,
               _kernel.UNDECIDED: Verdict.UNDECIDED}[status]
    return traj, verdict, int(steps_used)


def run(game: Game, start: StrategyPair, cfg: SimConfig = SimConfig(), *,
        record: bool = True) -> tuple[Trajectory, RunSummary]:
    """Simulate from ``start`` for ``cfg.max_steps`` steps.

    The run always covers the full horizon so the averages are over all of
    it; ``steps_used`` is the step at which the final verdict was reached.
    """
    traj, verdict, steps_used = _simulate(game, start, cfg, cfg.step_sizes(), record)
    return traj, summarize(game, traj, verdict, steps_used)


def summarize(game: Game, traj: Trajectory, verdict: Verdict, steps_used: int,
              nash_set=None) -> RunSummary:
    ns = nash_set if nash_set is not None else enumerate_nash(game)
    last = traj.data[-1]
    final = StrategyPair(last[2], last[3])
    avg = average_payoffs(traj)
    return RunSummary(
        verdict=verdict,
        final_strategy=final,
        avg_payoffs=avg,
        nash_payoff_distance=nearest_nash_payoff_distance(game, *avg, nash_set=ns),
        nash_strategy_distance=nearest_nash_strategy_distance(game, final, nash_set=ns),
        steps_used=steps_used,
    )


def average_payoffs(traj: Trajectory) -> tuple[float, float]:
    if len(traj) == 0:
        raise ValueError("empty trajectory has no average payoff")
    return float(traj.data[-1, 6]), float(traj.data[-1, 7])


# -- sweeps -------------------------------------------------------------------

def random_games(seed: int, n_games: int) -> list[Game]:
    """``n_games`` games with every payoff uniform in [-1, 1]."""
    rng = np.random.default_rng(seed)
    return [Game(*map(float, row)) for row in rng.uniform(-1.0, 1.0, size=(n_games, 8))]


@dataclass(frozen=True)
class GameResult:
    index: int
    game: Game
    regime: Regime
    runs: tuple[tuple[StrategyPair, RunSummary], ...]

    @property
    def max_distance(self) -> float:
        return max(s.nash_payoff_distance for _, s in self.runs)


def run_game(index: int, game: Game, cfg: SimConfig, h: Optional[np.ndarray] = None,
             starts: Sequence[StrategyPair] = STANDARD_STARTS) -> GameResult:
    h = cfg.step_sizes() if h is None else h
    ns = enumerate_nash(game)
    runs = []
    for start in starts:
        traj, verdict, used = _simulate(game, start, cfg, h, record=False)
        runs.append((start, summarize(game, traj, verdict, used, ns)))
    return GameResult(index, game, classify(game).regime, tuple(runs))


@dataclass(frozen=True)
class SweepReport:
    seed: int
    config: SimConfig
    results: tuple[GameResult, ...]
    n_worst: int = 10

    @property
    def game_distances(self) -> list[float]:
        return [r.max_distance for r in self.results]

    def to_dict(self) -> dict[str, Any]:
        regimes = {r.value: 0 for r in Regime}
        verdicts = {v.value: 0 for v in Verdict}
        all_runs = []
        for res in self.results:
            regimes[res.regime.value] += 1
            for start, summary in res.runs:
                verdicts[summary.verdict.value] += 1
                all_runs.append((summary.nash_payoff_distance, res.index, start, summary))
        dists = [d for d, *_ in all_runs]
        game_d = self.game_distances
        worst = sorted(all_runs, key=lambda x: (-x[0], x[1]))[: self.n_worst]
        return {
            "seed": self.seed,
            "n_games": len(self.results),
            "config": self.config.to_dict(),
            "regime_counts": regimes,
            "verdict_counts": verdicts,
            "max_nash_payoff_distance": max(dists),
            "mean_nash_payoff_distance": statistics.fmean(dists),
            "median_game_nash_payoff_distance": statistics.median(game_d),
            "worst": [
                {"game_index": i, "game": self.results[i].game.to_dict(),
                 "start": list(start.as_tuple()), **summary.to_dict()}
                for _, i, start, summary in worst
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def sweep(generator_seed: int, n_games: int, cfg: SimConfig = SimConfig(), *,
          workers: int = 1, starts: Sequence[StrategyPair] = STANDARD_STARTS) -> SweepReport:
    """Run every start on ``n_games`` seeded random games.

    Results are keyed by game index, so the report does not depend on
    ``workers``.
    """
    if n_games < 1:
        raise ValueError(f"n_games must be at least 1, got {n_games}")
    if workers < 1:
        raise ValueError(f"workers must be at least 1, got {workers}")
    games = random_games(generator_seed, n_games)
    h = cfg.step_sizes()
    if workers == 1:
        results = [run_game(i, g, cfg, h, starts) for i, g in enumerate(games)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda ig: run_game(ig[0], ig[1], cfg, h, starts), enumerate(games)))
    return SweepReport(generator_seed, cfg, tuple(results))
