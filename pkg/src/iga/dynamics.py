"""Analysis of the affine gradient flow of a 2x2 game.

Without the unit-square constraint both players' gradients follow

    d(alpha)/dt = u * beta - b_r
    d(beta)/dt  = u' * alpha - b_c

whose qualitative behaviour is set by the sign of ``u * u'``: no unique
center when the product vanishes, closed ellipses when it is negative, and a
saddle when it is positive. This module classifies a game, gives the closed
form of the unconstrained flow, traces the constrained (projected) flow
exactly from event to event, and predicts where it ends up.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any, Optional

from .game import (
    Game,
    StrategyPair,
    UParams,
    is_negligible,
    projected_gradient,
    u_params,
    value_col,
    value_row,
)

Point = tuple[float, float]

BOUNDARY_TOL = 1e-12
# Levels of the conserved quantity are compared with this relative slack.
LEVEL_RTOL = 1e-9
MAX_EVENTS = 256


class Regime(str, enum.Enum):
    NON_INVERTIBLE = "NonInvertible"
    IMAGINARY_EIGEN = "ImaginaryEigen"
    REAL_EIGEN = "RealEigen"


class CenterLocation(str, enum.Enum):
    INTERIOR = "Interior"
    ON_BOUNDARY = "OnBoundary"
    OUTSIDE = "Outside"


class OutcomeKind(str, enum.Enum):
    CONVERGE_TO_POINT = "ConvergeToPoint"
    LIMIT_CYCLE = "LimitCycle"


class NonInvertibleError(ValueError):
    """The requested quantity needs u and u' both non-zero."""


@dataclass(frozen=True)
class DynamicsClass:
    regime: Regime
    u: float
    u_prime: float
    center: Optional[Point]
    center_location: Optional[CenterLocation]

    def to_dict(self) -> dict[str, Any]:
        return {
            "regime": self.regime.value,
            "u": self.u,
            "u_prime": self.u_prime,
            "center": None if self.center is None else list(self.center),
            "center_location": None if self.center_location is None else self.center_location.value,
        }


@dataclass(frozen=True)
class EigenStructure:
    eigenvalues: tuple[complex, complex]
    axis_vectors: tuple[Point, Point]

    @property
    def is_circular(self) -> bool:
        """Whether the ellipses of an imaginary-eigenvalue flow are circles."""
        (x1, y1), (x2, y2) = self.axis_vectors
        return (self.eigenvalues[0].real == 0.0
                and math.isclose(math.hypot(x1, y1), math.hypot(x2, y2), rel_tol=1e-12))

    def to_dict(self) -> dict[str, Any]:
        return {
            "eigenvalues": [[z.real, z.imag] for z in self.eigenvalues],
            "axis_vectors": [list(v) for v in self.axis_vectors],
        }


@dataclass(frozen=True)
class OutcomePrediction:
    kind: OutcomeKind
    target: Optional[StrategyPair]
    cycle_center: Optional[StrategyPair]
    predicted_avg_payoffs: tuple[float, float]
    cycle_level: Optional[float] = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "target": None if self.target is None else list(self.target.as_tuple()),
            "cycle_center": None if self.cycle_center is None else list(self.cycle_center.as_tuple()),
            "predicted_avg_payoffs": list(self.predicted_avg_payoffs),
            "cycle_level": self.cycle_level,
        }


def _locate(center: Point) -> CenterLocation:
    def inside(x: float) -> bool:
        return BOUNDARY_TOL < x < 1.0 - BOUNDARY_TOL

    def near(x: float) -> bool:
        return -BOUNDARY_TOL <= x <= 1.0 + BOUNDARY_TOL

    if inside(center[0]) and inside(center[1]):
        return CenterLocation.INTERIOR
    if near(center[0]) and near(center[1]):
        return CenterLocation.ON_BOUNDARY
    return CenterLocation.OUTSIDE


def classify(game: Game) -> DynamicsClass:
    p = u_params(game)
    if is_negligible(p.u, game) or is_negligible(p.u_prime, game):
        return DynamicsClass(Regime.NON_INVERTIBLE, p.u, p.u_prime, None, None)
    center = (p.b_c / p.u_prime, p.b_r / p.u)
    regime = Regime.IMAGINARY_EIGEN if p.u * p.u_prime < 0 else Regime.REAL_EIGEN
    return DynamicsClass(regime, p.u, p.u_prime, center, _locate(center))


def _require_invertible(game: Game) -> tuple[UParams, DynamicsClass]:
    cls = classify(game)
    if cls.regime is Regime.NON_INVERTIBLE:
        raise NonInvertibleError(f"u={cls.u!r}, u'={cls.u_prime!r}: U is not invertible")
    return u_params(game), cls


def eigenstructure(game: Game) -> EigenStructure:
    """Eigenvalues of U and the axes (imaginary case) or eigenvectors (real case)."""
    p, cls = _require_invertible(game)
    rate = math.sqrt(abs(p.u * p.u_prime))
    if cls.regime is Regime.IMAGINARY_EIGEN:
        return EigenStructure(
            (complex(0.0, rate), complex(0.0, -rate)),
            ((0.0, math.sqrt(abs(p.u_prime) / abs(p.u))), (1.0, 0.0)),
        )
    slope = math.copysign(math.sqrt(p.u_prime / p.u), p.u)
    return EigenStructure((complex(rate, 0.0), complex(-rate, 0.0)), ((1.0, slope), (1.0, -slope)))


def angular_rate(game: Game) -> float:
    """sqrt(|u u'|): the rotation rate (imaginary case) or growth rate (real case)."""
    p, _ = _require_invertible(game)
    return math.sqrt(abs(p.u * p.u_prime))


def period(game: Game) -> float:
    """Period of the closed unconstrained orbits of an imaginary-eigenvalue game."""
    p, cls = _require_invertible(game)
    if cls.regime is not Regime.IMAGINARY_EIGEN:
        raise ValueError("only imaginary-eigenvalue games have periodic orbits")
    return 2.0 * math.pi / math.sqrt(abs(p.u * p.u_prime))


def conserved_quantity(game: Game, point: Point) -> float:
    """|u'| (alpha - alpha*)^2 + |u| (beta - beta*)^2, constant on ellipses."""
    p, cls = _require_invertible(game)
    assert cls.center is not None
    x, y = point[0] - cls.center[0], point[1] - cls.center[1]
    return abs(p.u_prime) * x * x + abs(p.u) * y * y


def face_tangent_levels(game: Game) -> dict[str, float]:
    """Level of the conserved quantity whose ellipse touches each face of the square."""
    p, cls = _require_invertible(game)
    assert cls.center is not None
    a, b = cls.center
    return {
        "alpha=0": abs(p.u_prime) * a * a,
        "alpha=1": abs(p.u_prime) * (1.0 - a) ** 2,
        "beta=0": abs(p.u) * b * b,
        "beta=1": abs(p.u) * (1.0 - b) ** 2,
    }


def absorbing_level(game: Game) -> float:
    """Level of the largest ellipse that fits inside the square (smallest tangent level)."""
    return min(face_tangent_levels(game).values())


def absorbing_tangent_point(game: Game) -> StrategyPair:
    """Point where the largest inscribed ellipse touches the square."""
    levels = face_tangent_levels(game)
    face = min(levels, key=levels.__getitem__)
    a, b = classify(game).center  # type: ignore[misc]
    return StrategyPair(*{"alpha=0": (0.0, b), "alpha=1": (1.0, b),
                          "beta=0": (a, 0.0), "beta=1": (a, 1.0)}[face])


# -- closed-form unconstrained flow -------------------------------------------

@dataclass(frozen=True)
class _Harmonic:
    """Coordinate of the form ``offset + amp * cos(rate * t + phase)``."""

    offset: float
    amp: float
    rate: float
    phase: float

    def at(self, t: float) -> float:
        return self.offset + self.amp * math.cos(self.rate * t + self.phase)

    def slope(self, t: float) -> float:
        return -self.amp * self.rate * math.sin(self.rate * t + self.phase)

    def crossings(self, level: float) -> list[float]:
        if self.amp == 0.0:
            return []
        c = (level - self.offset) / self.amp
        if abs(c) > 1.0:
            return []
        theta = math.acos(max(-1.0, min(1.0, c)))
        tau = 2.0 * math.pi / self.rate
        return [((s * theta - self.phase) / self.rate) % tau for s in (1.0, -1.0)]


@dataclass(frozen=True)
class _Hyperbolic:
    """Coordinate of the form ``offset + grow * e^(rate t) + decay * e^(-rate t)``."""

    offset: float
    grow: float
    decay: float
    rate: float

    def at(self, t: float) -> float:
        return self.offset + self.grow * math.exp(self.rate * t) + self.decay * math.exp(-self.rate * t)

    def slope(self, t: float) -> float:
        return self.rate * (self.grow * math.exp(self.rate * t) - self.decay * math.exp(-self.rate * t))

    def crossings(self, level: float) -> list[float]:
        # grow z^2 - c z + decay = 0 with z = e^(rate t)
        c = level - self.offset
        if self.grow == 0.0:
            zs = [self.decay / c] if c != 0.0 else []
        else:
            disc = c * c - 4.0 * self.grow * self.decay
            if disc < 0.0:
                return []
            root = math.sqrt(disc)
            q = -0.5 * (-c + math.copysign(root, -c)) if c != 0.0 else 0.5 * root
            zs = [q / self.grow]
            if q != 0.0:
                zs.append(self.decay / q)
            else:
                zs.append(-q / self.grow)
        return [math.log(z) / self.rate for z in zs if z > 0.0]


@dataclass(frozen=True)
class _Quadratic:
    """Coordinate of the form ``c0 + c1 t + c2 t^2``."""

    c0: float
    c1: float
    c2: float

    def at(self, t: float) -> float:
        return self.c0 + t * (self.c1 + t * self.c2)

    def slope(self, t: float) -> float:
        return self.c1 + 2.0 * self.c2 * t

    def crossings(self, level: float) -> list[float]:
        a, b, c = self.c2, self.c1, self.c0 - level
        if a == 0.0:
            return [-c / b] if b != 0.0 else []
        disc = b * b - 4.0 * a * c
        if disc < 0.0:
            return []
        q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
        roots = [q / a]
        if q != 0.0:
            roots.append(c / q)
        return roots


def _flow(game: Game, start: Point):
    """Per-coordinate closed forms of the unconstrained flow through ``start``."""
    p = u_params(game)
    cls = classify(game)
    a0, b0 = float(start[0]), float(start[1])
    if cls.regime is Regime.NON_INVERTIBLE:
        u = 0.0 if is_negligible(p.u, game) else p.u
        up = 0.0 if is_negligible(p.u_prime, game) else p.u_prime
        ga, gb = u * b0 - p.b_r, up * a0 - p.b_c
        if u == 0.0:
            # alpha moves at constant speed; beta integrates an affine-in-t speed
            return _Quadratic(a0, ga, 0.0), _Quadratic(b0, gb, 0.5 * up * ga)
        return _Quadratic(a0, ga, 0.5 * u * gb), _Quadratic(b0, gb, 0.0)

    assert cls.center is not None
    ac, bc = cls.center
    x0, y0 = a0 - ac, b0 - bc
    rate = math.sqrt(abs(p.u * p.u_prime))
    if cls.regime is Regime.IMAGINARY_EIGEN:
        # alpha = alpha* + B sqrt|u| cos(wt + phi), beta = beta* - sgn(u) B sqrt|u'| sin(wt + phi)
        su, sup = math.sqrt(abs(p.u)), math.sqrt(abs(p.u_prime))
        sign = math.copysign(1.0, p.u)
        amp_b = math.hypot(x0 / su, y0 / sup)
        phi = math.atan2(-sign * y0 / sup, x0 / su)
        return (_Harmonic(ac, amp_b * su, rate, phi),
                _Harmonic(bc, amp_b * sup, rate, phi + sign * 0.5 * math.pi))
    # eigenbasis: v+ = (1, k) for +rate, v- = (1, -k) for -rate
    k = rate / p.u
    c_plus, c_minus = 0.5 * (x0 + y0 / k), 0.5 * (x0 - y0 / k)
    return (_Hyperbolic(ac, c_plus, c_minus, rate),
            _Hyperbolic(bc, k * c_plus, -k * c_minus, rate))


def unconstrained_state(game: Game, start: Point, t: float) -> Point:
    """State at time ``t`` of the affine flow through ``start``, ignoring the square."""
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    fa, fb = _flow(game, start)
    return (fa.at(t), fb.at(t))


# -- exact constrained flow ---------------------------------------------------

@dataclass
class ConstrainedPath:
    """Event points of the projected flow and how it ends.

    ``kind`` is ``"point"`` when the flow reaches (or asymptotically
    approaches) a point of zero projected gradient, and ``"cycle"`` when it
    settles on an ellipse that fits inside the square.
    """

    kind: str
    end: StrategyPair
    events: list[tuple[float, float, float]] = field(default_factory=list)
    level: Optional[float] = None


def _face_status(x: float, g: float, vtol: float) -> Optional[bool]:
    """True if the coordinate may move, False if clamped, None on a tie at a face."""
    if 0.0 < x < 1.0:
        return True
    if abs(g) <= vtol:
        return None
    return (g > 0.0) == (x <= 0.0)


def _free_by_trend(x: float, dg: float) -> bool:
    # a vanishing gradient on a face frees the coordinate iff it is turning inward
    return (dg > 0.0) == (x <= 0.0) and dg != 0.0


def _first_exit(game: Game, pos: Point, vtol: float) -> Optional[tuple[float, int, float]]:
    """Earliest outward crossing of a face by the unconstrained flow from ``pos``."""
    best: Optional[tuple[float, int, float]] = None
    for axis, coord in enumerate(_flow(game, pos)):
        for edge, outward in ((0.0, -1.0), (1.0, 1.0)):
            for t in coord.crossings(edge):
                if not t > 1e-13 or coord.slope(t) * outward <= vtol:
                    continue
                if best is None or t < best[0]:
                    best = (t, axis, edge)
    return best


def trace_constrained(game: Game, start: StrategyPair, max_events: int = MAX_EVENTS) -> ConstrainedPath:
    """Follow the projected gradient flow exactly, one event at a time.

    Interior stretches use the closed-form flow up to the first face
    crossing. Along a face the clamped coordinate is frozen, so the other
    one moves at constant speed until it reaches a corner or the frozen
    coordinate's gradient turns back into the square.
    """
    p = u_params(game)
    cls = classify(game)
    vtol = 1e-12 * game.scale
    u = 0.0 if is_negligible(p.u, game) else p.u
    up = 0.0 if is_negligible(p.u_prime, game) else p.u_prime
    closed_orbits = cls.regime is Regime.IMAGINARY_EIGEN and cls.center_location is CenterLocation.INTERIOR
    q_abs = absorbing_level(game) if closed_orbits else math.inf

    a, b = start.alpha, start.beta
    t_now = 0.0
    events = [(0.0, a, b)]
    for _ in range(max_events):
        ga, gb = u * b - p.b_r, up * a - p.b_c
        fa = _face_status(a, ga, vtol)
        fb = _face_status(b, gb, vtol)
        if fa is None and fb is None:
            break
        if fa is None:
            fa = _free_by_trend(a, u * (gb if fb else 0.0))
        if fb is None:
            fb = _free_by_trend(b, up * (ga if fa else 0.0))
        va = ga if fa else 0.0
        vb = gb if fb else 0.0
        if abs(va) <= vtol and abs(vb) <= vtol:
            break

        if fa and fb:
            if closed_orbits:
                level = conserved_quantity(game, (a, b))
                if level <= q_abs * (1.0 + LEVEL_RTOL):
                    return ConstrainedPath("cycle", StrategyPair(a, b), events, level)
            hit = _first_exit(game, (a, b), vtol)
            if hit is None:
                if cls.regime is Regime.REAL_EIGEN:
                    # only the stable eigenline stays inside forever
                    assert cls.center is not None
                    a, b = cls.center
                    events.append((math.inf, a, b))
                break
            tau, axis, edge = hit
            na, nb = unconstrained_state(game, (a, b), tau)
            if axis == 0:
                na = edge
            else:
                nb = edge
            a, b = min(1.0, max(0.0, na)), min(1.0, max(0.0, nb))
        else:
            # slide along a face: the moving coordinate has constant speed
            if fa:
                x, v, slope, offset = a, va, up, p.b_c
            else:
                x, v, slope, offset = b, vb, u, p.b_r
            tau = (1.0 - x) / v if v > 0 else x / -v
            target = 1.0 if v > 0 else 0.0
            if slope != 0.0:
                release = offset / slope
                if (release - x) * v > 0 and abs(release - x) < abs(target - x):
                    tau, target = (release - x) / v, release
            if fa:
                a = target
            else:
                b = target
        t_now += tau
        events.append((t_now, a, b))
    else:
        raise RuntimeError(f"constrained flow from {start} did not settle in {max_events} events")
    return ConstrainedPath("point", StrategyPair(a, b), events)


# -- outcome prediction -------------------------------------------------------

def _point_outcome(game: Game, target: StrategyPair) -> OutcomePrediction:
    return OutcomePrediction(OutcomeKind.CONVERGE_TO_POINT, target, None,
                             (value_row(game, target), value_col(game, target)))


def _constant_sign(slope: float, offset: float, game: Game) -> int:
    """Sign of ``slope * x - offset`` if it never vanishes on [0, 1], else 0."""
    lo, hi = -offset, slope - offset
    if is_negligible(slope, game):
        lo = hi = -offset
    if lo > 0 and hi > 0 and not is_negligible(min(lo, hi), game):
        return 1
    if lo < 0 and hi < 0 and not is_negligible(max(lo, hi), game):
        return -1
    return 0


def predict_outcome(game: Game, start: StrategyPair) -> OutcomePrediction:
    """Where the projected gradient flow from ``start`` ends up.

    * A start with zero projected gradient stays put.
    * Imaginary eigenvalues with an interior center: the flow settles on
      its own ellipse if that fits inside the square, otherwise on the
      largest inscribed ellipse. Either way the long-run average payoffs are
      those of the center.
    * If one player's gradient has a constant sign over the whole square
      (center outside it, or that player's u vanishing) that player runs to
      the corresponding pure action; the other player then faces a constant
      gradient and does the same.
    * A player who is indifferent everywhere never moves; the other one
      faces a constant gradient.
    * The remaining configurations (saddle or center on the boundary)
      depend on the path and are resolved by tracing the constrained flow.
    """
    if projected_gradient(game, start).norm() == 0.0:
        return _point_outcome(game, start)
    p = u_params(game)
    cls = classify(game)

    if cls.regime is Regime.IMAGINARY_EIGEN and cls.center_location is CenterLocation.INTERIOR:
        assert cls.center is not None
        level = min(conserved_quantity(game, start.as_tuple()), absorbing_level(game))
        center = StrategyPair(*cls.center)
        return OutcomePrediction(OutcomeKind.LIMIT_CYCLE, None, center,
                                 (value_row(game, center), value_col(game, center)), level)

    row_sign = _constant_sign(p.u, p.b_r, game)        # d alpha over beta in [0, 1]
    col_sign = _constant_sign(p.u_prime, p.b_c, game)  # d beta over alpha in [0, 1]
    row_idle = is_negligible(p.u, game) and is_negligible(p.b_r, game)
    col_idle = is_negligible(p.u_prime, game) and is_negligible(p.b_c, game)

    def pure(sign: int) -> float:
        return 1.0 if sign > 0 else 0.0

    if col_sign or col_idle:
        beta = pure(col_sign) if col_sign else start.beta
        g = p.u * beta - p.b_r
        if not is_negligible(g, game):
            return _point_outcome(game, StrategyPair(1.0 if g > 0 else 0.0, beta))
        if col_idle:
            return _point_outcome(game, start)
    if row_sign or row_idle:
        alpha = pure(row_sign) if row_sign else start.alpha
        g = p.u_prime * alpha - p.b_c
        if not is_negligible(g, game):
            return _point_outcome(game, StrategyPair(alpha, 1.0 if g > 0 else 0.0))
        if row_idle:
            return _point_outcome(game, start)

    path = trace_constrained(game, start)
    if path.kind == "cycle":
        assert cls.center is not None
        center = StrategyPair(*cls.center)
        return OutcomePrediction(OutcomeKind.LIMIT_CYCLE, None, center,
                                 (value_row(game, center), value_col(game, center)), path.level)
    return _point_outcome(game, path.end)
