"""Two-player, two-action general-sum games and their payoff/gradient algebra.

A game is the pair of payoff matrices ``R`` (row player) and ``C`` (column
player). Index ``[i][j]`` is the payoff when the row player plays action
``i + 1`` and the column player plays action ``j + 1``. A mixed strategy pair
``(alpha, beta)`` gives the probability that each player picks action 1.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

# Strategy coordinates this far outside [0, 1] are rounded back in.
FEASIBILITY_TOL = 1e-12
# Relative tolerance used when deciding that u, u' (or an offset) vanish.
ZERO_TOL = 1e-12


class GameFormatError(ValueError):
    """A game file or matrix literal could not be turned into a Game."""


class InfeasibleStrategyError(ValueError):
    """A strategy coordinate lies outside the unit square."""


@dataclass(frozen=True)
class Game:
    r11: float
    r12: float
    r21: float
    r22: float
    c11: float
    c12: float
    c21: float
    c22: float

    def __post_init__(self) -> None:
        for name in ("r11", "r12", "r21", "r22", "c11", "c12", "c21", "c22"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise GameFormatError(f"{name}: expected a real number, got {value!r}")
            if not math.isfinite(value):
                raise GameFormatError(f"{name}: payoff must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))

    @classmethod
    def from_matrices(cls, r: Sequence[Sequence[float]], c: Sequence[Sequence[float]]) -> "Game":
        rows = []
        for label, m in (("r", r), ("c", c)):
            if len(m) != 2 or any(len(row) != 2 for row in m):
                raise GameFormatError(f"{label}: expected a 2x2 matrix, got {m!r}")
            rows.append(m)
        (r11, r12), (r21, r22) = rows[0]
        (c11, c12), (c21, c22) = rows[1]
        return cls(r11, r12, r21, r22, c11, c12, c21, c22)

    @property
    def r(self) -> tuple[tuple[float, float], tuple[float, float]]:
        return ((self.r11, self.r12), (self.r21, self.r22))

    @property
    def c(self) -> tuple[tuple[float, float], tuple[float, float]]:
        return ((self.c11, self.c12), (self.c21, self.c22))

    @property
    def entries(self) -> tuple[float, ...]:
        return (self.r11, self.r12, self.r21, self.r22, self.c11, self.c12, self.c21, self.c22)

    @property
    def scale(self) -> float:
        """Largest absolute payoff, floored at 1 so tolerances never collapse."""
        return max(1.0, max(abs(x) for x in self.entries))

    @property
    def is_zero_sum(self) -> bool:
        return all(a + b == 0 for a, b in zip(self.entries[:4], self.entries[4:]))

    @property
    def is_team(self) -> bool:
        return self.entries[:4] == self.entries[4:]

    def to_dict(self) -> dict[str, Any]:
        return {"r": [list(row) for row in self.r], "c": [list(row) for row in self.c]}


@dataclass(frozen=True)
class StrategyPair:
    """A point of the unit square.

    Coordinates within ``FEASIBILITY_TOL`` of the square are clamped onto it;
    anything further out raises :class:`InfeasibleStrategyError`.
    """

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        for name in ("alpha", "beta"):
            value = float(getattr(self, name))
            if not (-FEASIBILITY_TOL <= value <= 1.0 + FEASIBILITY_TOL):
                raise InfeasibleStrategyError(f"{name}={value!r} is outside [0, 1]")
            object.__setattr__(self, name, min(1.0, max(0.0, value)))

    def as_tuple(self) -> tuple[float, float]:
        return (self.alpha, self.beta)

    def linf(self, other: "StrategyPair") -> float:
        return max(abs(self.alpha - other.alpha), abs(self.beta - other.beta))


@dataclass(frozen=True)
class GradientVector:
    d_alpha: float
    d_beta: float

    def norm(self) -> float:
        return math.hypot(self.d_alpha, self.d_beta)


@dataclass(frozen=True)
class UParams:
    u: float
    u_prime: float
    b_r: float
    b_c: float


def value_row(game: Game, s: StrategyPair) -> float:
    a, b = s.alpha, s.beta
    return (game.r11 * (a * b) + game.r22 * ((1 - a) * (1 - b))
            + game.r12 * (a * (1 - b)) + game.r21 * ((1 - a) * b))


def value_col(game: Game, s: StrategyPair) -> float:
    a, b = s.alpha, s.beta
    return (game.c11 * (a * b) + game.c22 * ((1 - a) * (1 - b))
            + game.c12 * (a * (1 - b)) + game.c21 * ((1 - a) * b))


def u_params(game: Game) -> UParams:
    return UParams(
        u=(game.r11 + game.r22) - (game.r21 + game.r12),
        u_prime=(game.c11 + game.c22) - (game.c21 + game.c12),
        b_r=game.r22 - game.r12,
        b_c=game.c22 - game.c21,
    )


def gradient(game: Game, s: StrategyPair) -> GradientVector:
    """Partial derivatives of each player's value in their own coordinate."""
    p = u_params(game)
    return GradientVector(s.beta * p.u - p.b_r, s.alpha * p.u_prime - p.b_c)


def project_component(x: float, g: float) -> float:
    """Zero a gradient component that would push ``x`` out of [0, 1]."""
    if (x <= 0.0 and g < 0.0) or (x >= 1.0 and g > 0.0):
        return 0.0
    return g


def projected_gradient(game: Game, s: StrategyPair) -> GradientVector:
    """Gradient with outward-pointing components zeroed on the boundary.

    Each coordinate is treated on its own, so at a corner either, both or
    neither component may be clamped. Interior points are returned unchanged.
    """
    g = gradient(game, s)
    return GradientVector(project_component(s.alpha, g.d_alpha),
                          project_component(s.beta, g.d_beta))


def is_negligible(x: float, game: Game) -> bool:
    return abs(x) <= ZERO_TOL * game.scale


# -- game files -------------------------------------------------------------

def game_from_dict(data: Any) -> Game:
    if not isinstance(data, dict):
        raise GameFormatError("top level: expected a JSON object with keys 'r' and 'c'")
    extra = set(data) - {"r", "c"}
    if extra:
        raise GameFormatError(f"unexpected key(s): {', '.join(sorted(extra))}")
    mats = []
    for key in ("r", "c"):
        if key not in data:
            raise GameFormatError(f"missing field '{key}'")
        m = data[key]
        if not isinstance(m, list) or len(m) != 2:
            raise GameFormatError(f"{key}: expected a list of two rows")
        for i, row in enumerate(m):
            if not isinstance(row, list) or len(row) != 2:
                raise GameFormatError(f"{key}[{i}]: expected a row of two numbers")
            for j, x in enumerate(row):
                if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
                    raise GameFormatError(f"{key}[{i}][{j}]: expected a finite number, got {x!r}")
        mats.append(m)
    return Game.from_matrices(*mats)


def loads_game(text: str) -> Game:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GameFormatError(f"invalid JSON: {exc}") from exc
    return game_from_dict(data)


def load_game(path: str | Path) -> Game:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise GameFormatError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return loads_game(text)


def dumps_game(game: Game) -> str:
    return json.dumps(game.to_dict())


def save_game(game: Game, path: str | Path) -> None:
    Path(path).write_text(dumps_game(game) + "\n")
