"""Gradient ascent dynamics in two-player, two-action general-sum games."""

from .dynamics import (
    CenterLocation,
    DynamicsClass,
    EigenStructure,
    NonInvertibleError,
    OutcomeKind,
    OutcomePrediction,
    Regime,
    classify,
    conserved_quantity,
    eigenstructure,
    period,
    predict_outcome,
    trace_constrained,
    unconstrained_state,
)
from .fixtures import fixture, fixture_names
from .game import (
    Game,
    GameFormatError,
    GradientVector,
    InfeasibleStrategyError,
    StrategyPair,
    UParams,
    gradient,
    load_game,
    projected_gradient,
    save_game,
    u_params,
    value_col,
    value_row,
)
from .nash import NashKind, NashPoint, NashSet, enumerate_nash, is_nash, nash_regret
from .simulator import (
    Mode,
    PowerSchedule,
    RunSummary,
    SimConfig,
    SimulationBlowupError,
    Trajectory,
    Verdict,
    average_payoffs,
    run,
    step_finite,
    step_iga,
    sweep,
)

__version__ = "0.1.0"
