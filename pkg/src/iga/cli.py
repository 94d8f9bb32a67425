"""Command-line front end.

Reports are JSON on stdout, diagnostics go to stderr, CSV output is always
written to a file. Exit codes: 0 success, 2 usage or input error, 3 internal
defect.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

import numpy as np

from .dynamics import NonInvertibleError, Regime, classify, eigenstructure, period
from .game import GameFormatError, InfeasibleStrategyError, StrategyPair, load_game, projected_gradient
from .nash import enumerate_nash
from .simulator import SCHEDULES, Mode, SimConfig, SimulationBlowupError, run, sweep

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DEFECT = 3

_MODES = {"iga": Mode.IGA_EULER, "finite": Mode.FINITE_STEP}


class UsageError(Exception):
    pass


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2) + "\n")


def _parse_start(text: str) -> StrategyPair:
    try:
        a, b = (float(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"--start: expected 'alpha,beta', got {text!r}") from None
    try:
        return StrategyPair(a, b)
    except InfeasibleStrategyError as exc:
        raise UsageError(f"--start: {exc}") from None


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {value}")
    return value


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not value > 0 or value == float("inf"):
        raise argparse.ArgumentTypeError(f"must be a positive finite number, got {text}")
    return value


def _config(args: argparse.Namespace) -> SimConfig:
    kwargs = {"mode": _MODES[args.mode], "max_steps": args.steps}
    if args.dt is not None:
        if args.mode != "iga":
            raise UsageError("--dt only applies to --mode iga")
        kwargs["dt"] = args.dt
    if args.schedule is not None:
        if args.mode != "finite":
            raise UsageError("--schedule only applies to --mode finite")
        kwargs["schedule"] = SCHEDULES[args.schedule]
    for name in ("record_every", "conv_tol", "window"):
        value = getattr(args, name, None)
        if value is not None:
            kwargs[name] = value
    try:
        return SimConfig(**kwargs)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_classify(args: argparse.Namespace) -> int:
    game = load_game(args.game)
    report = classify(game).to_dict()
    try:
        report["eigenstructure"] = eigenstructure(game).to_dict()
    except NonInvertibleError:
        report["eigenstructure"] = None
    report["period"] = period(game) if classify(game).regime is Regime.IMAGINARY_EIGEN else None
    _emit(report)
    return EXIT_OK


def cmd_nash(args: argparse.Namespace) -> int:
    _emit(enumerate_nash(load_game(args.game)).to_dict())
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    game = load_game(args.game)
    start = _parse_start(args.start)
    traj, summary = run(game, start, _config(args))
    traj.write_csv(args.out)
    _emit(summary.to_dict())
    return EXIT_OK


def cmd_phase(args: argparse.Namespace) -> int:
    game = load_game(args.game)
    if args.grid < 2:
        raise UsageError(f"--grid must be at least 2, got {args.grid}")
    axis = np.linspace(0.0, 1.0, args.grid)
    with open(args.out, "w") as fh:
        fh.write("alpha,beta,d_alpha,d_beta\n")
        for a in axis:
            for b in axis:
                g = projected_gradient(game, StrategyPair(float(a), float(b)))
                fh.write(f"{float(a)!r},{float(b)!r},{g.d_alpha!r},{g.d_beta!r}\n")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    report = sweep(args.seed, args.count, _config(args), workers=args.workers)
    sys.stdout.write(report.to_json() + "\n")
    return EXIT_OK


def _add_sim_flags(p: argparse.ArgumentParser, default_steps: int) -> None:
    p.add_argument("--mode", choices=sorted(_MODES), default="iga")
    p.add_argument("--steps", type=_positive_int, default=default_steps)
    step = p.add_mutually_exclusive_group()
    step.add_argument("--dt", type=_positive_float, help="Euler step (iga mode)")
    step.add_argument("--schedule", choices=sorted(SCHEDULES), help="step-size rule (finite mode)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="iga", description="Gradient ascent dynamics in 2x2 games.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="dynamics regime, center and eigenstructure")
    p.add_argument("game")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("nash", help="enumerate Nash equilibria")
    p.add_argument("game")
    p.set_defaults(func=cmd_nash)

    p = sub.add_parser("simulate", help="simulate from a start point")
    p.add_argument("game")
    p.add_argument("--start", required=True, help="alpha,beta")
    p.add_argument("--out", required=True, help="trajectory CSV path")
    _add_sim_flags(p, 200_000)
    p.add_argument("--record-every", type=_positive_int)
    p.add_argument("--conv-tol", type=_positive_float)
    p.add_argument("--window", type=_positive_int)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("phase", help="projected gradient field on a lattice")
    p.add_argument("game")
    p.add_argument("--grid", type=int, default=21)
    p.add_argument("--out", required=True, help="CSV path")
    p.set_defaults(func=cmd_phase)

    p = sub.add_parser("sweep", help="random-game convergence sweep")
    p.add_argument("--count", type=_positive_int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=_positive_int, default=1)
    _add_sim_flags(p, 200_000)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (GameFormatError, UsageError) as exc:
        print(f"iga {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"iga {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SimulationBlowupError as exc:
        print(f"iga {args.command}: defect: {exc}", file=sys.stderr)
        return EXIT_DEFECT
    except Exception as exc:  # anything else is a bug
        print(f"iga {args.command}: internal error: {exc!r}", file=sys.stderr)
        return EXIT_DEFECT


if __name__ == "__main__":
    sys.exit(main())
