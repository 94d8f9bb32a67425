"""Closed-form Nash equilibrium enumeration for 2x2 bimatrix games.

Each player's best-response correspondence is a finite union of closed,
axis-aligned boxes in the unit square (a pure action on the set where its
payoff slope has the right sign, every mixture where the slope vanishes).
The Nash set is the union of the pairwise box intersections, so it can be
computed exactly without any numerical search.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any, Optional

from .game import Game, StrategyPair, is_negligible, u_params, value_col, value_row

Interval = tuple[float, float]
Box = tuple[Interval, Interval]

DISTINCT_TOL = 1e-9


class NashKind(str, enum.Enum):
    PURE_PURE = "PurePure"
    INTERIOR_MIXED = "InteriorMixed"
    BOUNDARY_MIXED = "BoundaryMixed"


class EmptyNashSetError(RuntimeError):
    """Raised when enumeration finds nothing, which can only be a bug."""


@dataclass(frozen=True)
class NashPoint:
    strategy: StrategyPair
    payoff_row: float
    payoff_col: float
    kind: NashKind

    def to_dict(self) -> dict[str, Any]:
        return {
            "alpha": self.strategy.alpha,
            "beta": self.strategy.beta,
            "payoff_row": self.payoff_row,
            "payoff_col": self.payoff_col,
            "kind": self.kind.value,
        }


@dataclass(frozen=True)
class NashSet:
    """Enumerated equilibria.

    ``segments`` holds one (low, high) corner pair per continuum of
    equilibria; for a segment these are its endpoints. The endpoints are
    also listed in ``points``.
    """

    points: tuple[NashPoint, ...]
    segments: tuple[tuple[StrategyPair, StrategyPair], ...] = field(default=())

    @property
    def has_continuum(self) -> bool:
        return bool(self.segments)

    @property
    def continuum_description(self) -> Optional[tuple[StrategyPair, StrategyPair]]:
        return self.segments[0] if self.segments else None

    def to_dict(self) -> dict[str, Any]:
        return {
            "points": [p.to_dict() for p in self.points],
            "has_continuum": self.has_continuum,
            "segments": [[[lo.alpha, lo.beta], [hi.alpha, hi.beta]] for lo, hi in self.segments],
        }


def _deviation_gains(game: Game, s: StrategyPair) -> tuple[float, float]:
    base_r = value_row(game, s)
    base_c = value_col(game, s)
    gain_r = max(value_row(game, StrategyPair(a, s.beta)) for a in (0.0, 1.0)) - base_r
    gain_c = max(value_col(game, StrategyPair(s.alpha, b)) for b in (0.0, 1.0)) - base_c
    return gain_r, gain_c


def nash_regret(game: Game, s: StrategyPair) -> float:
    """Largest payoff gain either player can get by a unilateral deviation."""
    return max(0.0, *_deviation_gains(game, s))


def is_nash(game: Game, s: StrategyPair, tol: float = 0.0) -> bool:
    # Values are affine in each player's own coordinate, so the two pure
    # deviations are the only ones that need checking.
    if tol < 0:
        raise ValueError(f"tol must be non-negative, got {tol}")
    gain_r, gain_c = _deviation_gains(game, s)
    return gain_r <= tol and gain_c <= tol


def _sign_set(slope: float, offset: float, game: Game) -> dict[int, Optional[Interval]]:
    """Subsets of [0, 1] where ``slope * x - offset`` is >= 0, <= 0 and == 0."""
    if is_negligible(slope, game):
        if is_negligible(offset, game):
            full = (0.0, 1.0)
            return {1: full, -1: full, 0: full}
        if offset < 0:
            return {1: (0.0, 1.0), -1: None, 0: None}
        return {1: None, -1: (0.0, 1.0), 0: None}
    root = offset / slope
    lower = (0.0, min(1.0, root)) if root >= 0.0 else None
    upper = (max(0.0, root), 1.0) if root <= 1.0 else None
    nonneg, nonpos = (upper, lower) if slope > 0 else (lower, upper)
    zero = (root, root) if 0.0 <= root <= 1.0 else None
    return {1: nonneg, -1: nonpos, 0: zero}


def _best_response_boxes(game: Game) -> tuple[list[Box], list[Box]]:
    p = u_params(game)
    row_sets = _sign_set(p.u, p.b_r, game)        # in beta
    col_sets = _sign_set(p.u_prime, p.b_c, game)  # in alpha
    row_actions = {1: (1.0, 1.0), -1: (0.0, 0.0), 0: (0.0, 1.0)}
    row = [(row_actions[k], iv) for k, iv in row_sets.items() if iv is not None]
    col = [(iv, row_actions[k]) for k, iv in col_sets.items() if iv is not None]
    return row, col


def _intersect(a: Interval, b: Interval) -> Optional[Interval]:
    lo, hi = max(a[0], b[0]), min(a[1], b[1])
    return (lo, hi) if lo <= hi else None


def _kind(s: StrategyPair) -> NashKind:
    on_a = s.alpha in (0.0, 1.0)
    on_b = s.beta in (0.0, 1.0)
    if on_a and on_b:
        return NashKind.PURE_PURE
    if on_a or on_b:
        return NashKind.BOUNDARY_MIXED
    return NashKind.INTERIOR_MIXED


def _in_box(s: StrategyPair, box: Box, tol: float = DISTINCT_TOL) -> bool:
    (a0, a1), (b0, b1) = box
    return a0 - tol <= s.alpha <= a1 + tol and b0 - tol <= s.beta <= b1 + tol


def enumerate_nash(game: Game) -> NashSet:
    """All Nash equilibria of ``game``: isolated points plus any continua."""
    row_boxes, col_boxes = _best_response_boxes(game)
    points: list[StrategyPair] = []
    boxes: list[Box] = []
    for ra, rb in row_boxes:
        for ca, cb in col_boxes:
            ia, ib = _intersect(ra, ca), _intersect(rb, cb)
            if ia is None or ib is None:
                continue
            if ia[0] == ia[1] and ib[0] == ib[1]:
                points.append(StrategyPair(ia[0], ib[0]))
            elif (ia, ib) not in boxes:
                boxes.append((ia, ib))

    if ((0.0, 1.0), (0.0, 1.0)) in boxes:
        boxes = [((0.0, 1.0), (0.0, 1.0))]
    points = [s for s in points if not any(_in_box(s, b) for b in boxes)]
    for (a0, a1), (b0, b1) in boxes:
        points += [StrategyPair(a0, b0), StrategyPair(a1, b1)]

    unique: list[StrategyPair] = []
    for s in sorted(points, key=StrategyPair.as_tuple):
        if all(s.linf(t) >= DISTINCT_TOL for t in unique):
            unique.append(s)
    if not unique:
        raise EmptyNashSetError(f"no equilibrium found for {game!r}")

    nash_points = tuple(
        NashPoint(s, value_row(game, s), value_col(game, s), _kind(s)) for s in unique
    )
    segments = tuple(
        (StrategyPair(a0, b0), StrategyPair(a1, b1)) for (a0, a1), (b0, b1) in boxes
    )
    return NashSet(nash_points, segments)


def _segment_distance(p: tuple[float, float], a: tuple[float, float], b: tuple[float, float]) -> float:
    dx, dy = b[0] - a[0], b[1] - a[1]
    length2 = dx * dx + dy * dy
    t = 0.0 if length2 == 0.0 else min(1.0, max(0.0, ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / length2))
    return math.hypot(p[0] - a[0] - t * dx, p[1] - a[1] - t * dy)


def nearest_nash_payoff_distance(game: Game, avg_row: float, avg_col: float,
                                 nash_set: Optional[NashSet] = None) -> float:
    """Euclidean distance in payoff space to the closest Nash payoff pair.

    Along a continuum segment the payoffs move affinely (values are affine
    in each coordinate and segments are axis-parallel), so the distance to
    the segment's payoff image is a point-to-segment distance.
    """
    ns = nash_set if nash_set is not None else enumerate_nash(game)
    target = (avg_row, avg_col)
    best = min(math.hypot(avg_row - p.payoff_row, avg_col - p.payoff_col) for p in ns.points)
    for lo, hi in ns.segments:
        a = (value_row(game, lo), value_col(game, lo))
        b = (value_row(game, hi), value_col(game, hi))
        if lo.alpha != hi.alpha and lo.beta != hi.beta:
            # Full square: both players indifferent, so the row value depends
            # on beta only and the column value on alpha only. Image is a box.
            dr = max(min(a[0], b[0]) - avg_row, 0.0, avg_row - max(a[0], b[0]))
            dc = max(min(a[1], b[1]) - avg_col, 0.0, avg_col - max(a[1], b[1]))
            best = min(best, math.hypot(dr, dc))
        else:
            best = min(best, _segment_distance(target, a, b))
    return best


def nearest_nash_strategy_distance(game: Game, s: StrategyPair,
                                   nash_set: Optional[NashSet] = None) -> float:
    """L-infinity distance from ``s`` to the Nash set, continua included."""
    ns = nash_set if nash_set is not None else enumerate_nash(game)
    best = min(s.linf(p.strategy) for p in ns.points)
    for lo, hi in ns.segments:
        da = max(lo.alpha - s.alpha, 0.0, s.alpha - hi.alpha)
        db = max(lo.beta - s.beta, 0.0, s.beta - hi.beta)
        best = min(best, max(da, db))
    return best
