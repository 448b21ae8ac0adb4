"""Finite-alphabet oracle: closed-form attacker, brute force, equilibrium."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from advreg.data import synth_generate
from advreg.errors import InputError
from advreg.models import build_classifier
from advreg.theory import (
    RANDOM_GUESS_GAIN,
    DiscreteGame,
    brute_force_attacker,
    discrete_gain,
    equilibrium_check,
    harvest_discrete_game,
    optimal_attacker,
    total_variation,
)

simplexes = st.lists(st.floats(min_value=1e-3, max_value=1.0), min_size=2, max_size=12)


def make_game(raw_m, raw_n):
    m = np.array(raw_m[: len(raw_n)])
    n = np.array(raw_n[: len(m)])
    return DiscreteGame(m / m.sum(), n / n.sum())


def test_game_validation():
    with pytest.raises(InputError):
        DiscreteGame(np.array([0.5, 0.5]), np.array([1.0]))
    with pytest.raises(InputError):
        DiscreteGame(np.array([0.6, 0.6]), np.array([0.5, 0.5]))
    with pytest.raises(InputError):
        DiscreteGame(np.array([-0.5, 1.5]), np.array([0.5, 0.5]))


def test_optimal_attacker_hand_example():
    game = DiscreteGame(np.array([0.5, 0.5]), np.array([1.0, 0.0]))
    h = optimal_attacker(game)
    assert h[0] == pytest.approx(0.5 / 1.5, rel=1e-15)
    assert h[1] == pytest.approx(1.0)
    expected = 0.5 * (0.5 * math.log(1 / 3) + 0.5 * math.log(1.0)) \
        + 0.5 * (1.0 * math.log(1 - 1 / 3))
    assert discrete_gain(game, h) == pytest.approx(expected, rel=1e-14)


def test_off_support_outcome_gets_half():
    game = DiscreteGame(np.array([1.0, 0.0]), np.array([1.0, 0.0]))
    assert optimal_attacker(game)[1] == 0.5


def test_equal_distributions_force_random_guessing():
    p = np.array([0.2, 0.3, 0.5])
    game = DiscreteGame(p, p.copy())
    h = optimal_attacker(game)
    assert np.all(h == 0.5)
    assert abs(discrete_gain(game, h) - RANDOM_GUESS_GAIN) < 1e-15
    ok, diag = equilibrium_check(game, tolerance=1e-9)
    assert ok
    assert diag["tv_distance"] == 0.0
    assert diag["max_attacker_deviation"] == 0.0


@given(simplexes, simplexes)
@settings(max_examples=60, deadline=None)
def test_optimal_attacker_dominates_random_attackers(raw_m, raw_n):
    game = make_game(raw_m, raw_n)
    h_star = optimal_attacker(game)
    best = discrete_gain(game, h_star)
    rng = np.random.default_rng(0)
    for _ in range(25):
        h = rng.uniform(0.0, 1.0, game.alphabet_size)
        assert best >= discrete_gain(game, h) - 1e-12


@given(simplexes, simplexes)
@settings(max_examples=30, deadline=None)
def test_brute_force_matches_closed_form(raw_m, raw_n):
    game = make_game(raw_m, raw_n)
    h_grid, gain_grid = brute_force_attacker(game, grid_resolution=2001)
    h_star = optimal_attacker(game)
    assert np.max(np.abs(h_grid - h_star)) <= 0.5 / 2000 + 1e-12
    assert discrete_gain(game, h_star) >= gain_grid - 1e-12


def test_gain_validation():
    game = DiscreteGame(np.array([0.5, 0.5]), np.array([0.5, 0.5]))
    with pytest.raises(InputError):
        discrete_gain(game, np.array([0.5]))
    with pytest.raises(InputError):
        discrete_gain(game, np.array([0.5, 1.5]))
    with pytest.raises(InputError):
        brute_force_attacker(game, grid_resolution=5)


def test_total_variation_extremes():
    same = DiscreteGame(np.array([0.4, 0.6]), np.array([0.4, 0.6]))
    assert total_variation(same) == 0.0
    disjoint = DiscreteGame(np.array([1.0, 0.0]), np.array([0.0, 1.0]))
    assert total_variation(disjoint) == 1.0


def test_equilibrium_check_threshold():
    game = DiscreteGame(np.array([0.45, 0.55]), np.array([0.55, 0.45]))
    tv = total_variation(game)
    assert equilibrium_check(game, tv + 1e-9)[0]
    assert not equilibrium_check(game, tv - 1e-9)[0]
    with pytest.raises(InputError):
        equilibrium_check(game, -0.1)


def test_harvest_discrete_game():
    ds = synth_generate(3, 8, 40, 0.2, seed=0)
    clf = build_classifier(8, 3, [10], seed=0)
    members = ds.subset(np.arange(50))
    nonmembers = ds.subset(np.arange(50, 120))
    game = harvest_discrete_game(clf, members, nonmembers, quantizer_bins=15)
    assert game.alphabet_size == 15
    assert abs(game.p_member.sum() - 1.0) < 1e-12
    assert abs(game.p_nonmember.sum() - 1.0) < 1e-12
    with pytest.raises(InputError):
        harvest_discrete_game(clf, members, nonmembers, quantizer_bins=1)


def test_harvest_identical_sets_is_at_equilibrium():
    ds = synth_generate(3, 8, 30, 0.2, seed=1)
    clf = build_classifier(8, 3, [10], seed=1)
    game = harvest_discrete_game(clf, ds, ds)
    ok, diag = equilibrium_check(game, tolerance=1e-12)
    assert ok
    assert abs(diag["optimal_gain"] - RANDOM_GUESS_GAIN) < 1e-12
