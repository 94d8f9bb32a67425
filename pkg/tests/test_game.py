import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iga.game import (
    Game,
    GameFormatError,
    InfeasibleStrategyError,
    StrategyPair,
    dumps_game,
    gradient,
    load_game,
    loads_game,
    project_component,
    projected_gradient,
    save_game,
    u_params,
    value_col,
    value_row,
)

from conftest import games, random_game_array, unit


def fd_gradient(game, a, b, h=1e-4):
    # values are bilinear, so the central difference is exact up to round-off
    da = (value_row(game, StrategyPair(a + h, b)) - value_row(game, StrategyPair(a - h, b))) / (2 * h)
    db = (value_col(game, StrategyPair(a, b + h)) - value_col(game, StrategyPair(a, b - h))) / (2 * h)
    return da, db


faces_or_inside = st.one_of(st.sampled_from([0.0, 1.0]), st.floats(1e-6, 1 - 1e-6))


def sign_oracle(x, g):
    # an outward component is one that would leave [0, 1] under a tiny step
    return 0.0 if not 0.0 <= x + 1e-9 * g <= 1.0 else g


class TestValues:
    def test_corner_returns_r11(self, pd):
        assert value_row(pd, StrategyPair(1, 1)) == 3

    def test_uniform_mixing_is_mean(self, pd):
        assert value_row(pd, StrategyPair(0.5, 0.5)) == pytest.approx(2.25)

    def test_matching_pennies_symmetric(self, mp):
        assert value_row(mp, StrategyPair(0.5, 0.5)) == 0
        assert value_col(mp, StrategyPair(0.5, 0.5)) == 0

    def test_column_corners(self, pd):
        assert value_col(pd, StrategyPair(0, 0)) == 1
        assert value_col(pd, StrategyPair(1, 0)) == 5

    @given(games, unit, unit)
    def test_bilinear_expansion(self, g, a, b):
        r = np.array(g.r)
        c = np.array(g.c)
        x = np.array([a, 1 - a])
        y = np.array([b, 1 - b])
        assert value_row(g, StrategyPair(a, b)) == pytest.approx(x @ r @ y, abs=1e-12)
        assert value_col(g, StrategyPair(a, b)) == pytest.approx(x @ c @ y, abs=1e-12)


class TestGradient:
    def test_pd_center(self, pd):
        g = gradient(pd, StrategyPair(0.5, 0.5))
        assert (g.d_alpha, g.d_beta) == pytest.approx((-1.5, -1.5))
        assert fd_gradient(pd, 0.5, 0.5) == pytest.approx((-1.5, -1.5), abs=1e-10)

    def test_matching_pennies_center_vanishes(self, mp):
        g = gradient(mp, StrategyPair(0.5, 0.5))
        assert g.d_alpha == 0 and g.d_beta == 0

    @given(unit, unit)
    def test_flat_row_player_has_constant_gradient(self, flat_row, a, b):
        assert gradient(flat_row, StrategyPair(a, b)).d_alpha == -2

    def test_matches_finite_differences_on_random_games(self):
        rng = np.random.default_rng(11)
        for row in random_game_array(3, 1000):
            g = Game(*row)
            a, b = rng.uniform(0.01, 0.99, 2)
            exact = gradient(g, StrategyPair(a, b))
            assert (exact.d_alpha, exact.d_beta) == pytest.approx(fd_gradient(g, a, b), abs=1e-9)


class TestProjection:
    def test_pd_nash_corner(self, pd):
        # recomputed: raw gradient at (0, 0) is (-1, -1), both outward
        raw = gradient(pd, StrategyPair(0, 0))
        assert (raw.d_alpha, raw.d_beta) == (-1, -1)
        g = projected_gradient(pd, StrategyPair(0, 0))
        assert (g.d_alpha, g.d_beta) == (0, 0)
        assert (g.d_alpha, g.d_beta) == (sign_oracle(0, -1), sign_oracle(0, -1))

    def test_inward_component_kept(self):
        game = Game.from_matrices([[0, 0], [0, -1]], [[0, 0], [0, 0]])
        s = StrategyPair(0, 0.5)
        assert gradient(game, s).d_alpha > 0
        assert projected_gradient(game, s).d_alpha == gradient(game, s).d_alpha

    @given(games, faces_or_inside, faces_or_inside)
    def test_matches_sign_oracle(self, g, a, b):
        raw = gradient(g, StrategyPair(a, b))
        proj = projected_gradient(g, StrategyPair(a, b))
        assert proj.d_alpha == sign_oracle(a, raw.d_alpha)
        assert proj.d_beta == sign_oracle(b, raw.d_beta)

    @given(games, st.floats(0.001, 0.999), st.floats(0.001, 0.999))
    def test_interior_untouched(self, g, a, b):
        assert projected_gradient(g, StrategyPair(a, b)) == gradient(g, StrategyPair(a, b))

    def test_project_component(self):
        assert project_component(0.0, -1.0) == 0.0
        assert project_component(0.0, 1.0) == 1.0
        assert project_component(1.0, 1.0) == 0.0
        assert project_component(0.5, -3.0) == -3.0


class TestUParams:
    def test_matching_pennies(self, mp):
        p = u_params(mp)
        assert (p.u, p.u_prime) == (4, -4)
        assert p.u == -p.u_prime

    def test_pd(self, pd):
        p = u_params(pd)
        assert (p.u, p.u_prime, p.b_r, p.b_c) == (-1, -1, 1, 1)

    @given(st.lists(st.floats(-10, 10), min_size=4, max_size=4))
    def test_zero_sum_and_team_identities(self, r):
        rr = [[r[0], r[1]], [r[2], r[3]]]
        zero_sum = Game.from_matrices(rr, [[-x for x in row] for row in rr])
        team = Game.from_matrices(rr, rr)
        assert zero_sum.is_zero_sum and team.is_team
        assert u_params(zero_sum).u == -u_params(zero_sum).u_prime
        assert u_params(team).u == u_params(team).u_prime

    def test_predicates(self, pd, mp):
        assert mp.is_zero_sum and not mp.is_team
        assert not pd.is_zero_sum and not pd.is_team


class TestStrategyPair:
    def test_rejects_outside_square(self):
        with pytest.raises(InfeasibleStrategyError):
            StrategyPair(1.5, 0.5)
        with pytest.raises(InfeasibleStrategyError):
            StrategyPair(0.5, math.nan)

    def test_clamps_round_off(self):
        s = StrategyPair(1.0 + 1e-13, -1e-13)
        assert s.as_tuple() == (1.0, 0.0)


class TestGameFile:
    def test_rejects_non_finite(self):
        with pytest.raises(GameFormatError):
            Game(math.inf, 0, 0, 0, 0, 0, 0, 0)

    @pytest.mark.parametrize("text, field", [
        ('{"r": [[1, 2], [3, 4]]}', "'c'"),
        ('{"r": [[1, "x"], [3, 4]], "c": [[0, 0], [0, 0]]}', "r[0][1]"),
        ('{"r": [[1, 2], [3]], "c": [[0, 0], [0, 0]]}', "r[1]"),
        ('{"r": [[1, 2], [3, 4]], "c": [[0, 0], [0, 0]], "d": 1}', "key.*d"),
        ('{"r": [[1, 2], [3, 4]], "c": [[0, 0], [0, NaN]]}', "c[1][1]"),
        ('[1, 2]', "object"),
        ('{"r": ', "JSON"),
    ])
    def test_diagnostics_name_field(self, text, field):
        with pytest.raises(GameFormatError, match=field.replace("[", r"\[")):
            loads_game(text)

    def test_missing_file(self, tmp_path):
        with pytest.raises((GameFormatError, OSError)):
            load_game(tmp_path / "nope.json")

    @settings(max_examples=200)
    @given(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=8, max_size=8))
    def test_round_trip_exact(self, entries):
        g = Game(*entries)
        again = loads_game(dumps_game(g))
        assert again == g
        assert json.loads(dumps_game(g)) == g.to_dict()

    def test_save_and_load(self, tmp_path, coord):
        path = tmp_path / "g.json"
        save_game(coord, path)
        assert load_game(path) == coord
