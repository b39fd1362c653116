import itertools
import random
from fractions import Fraction

from oracles import grid_equilibria, random_game
from powergame.model import EnvironmentGraph, StrategyMatrix, check_row, state_vector, unflatten
from powergame.preferences import PairwiseUtilities, Preferences, parse_order, reduce_state
from powergame.response import (
    best_response, critical_allocation, current_reduced, deviation_feasible, improves,
    is_equilibrium, threshold,
)

F = Fraction
CHAIN_ORDERS = [
    "111~110>101~100>010~011~001~000",
    "111>011>110>010>101>001~100>000",
    "111~011>101~001>110~010~100~000",
]


def chain():
    g = EnvironmentGraph.build([5, 9, 5], {(0, 1): -1, (1, 2): -1}, {(0, 1): 1, (1, 2): 1})
    return g, Preferences.from_orders([parse_order(t) for t in CHAIN_ORDERS])


def at(g, *flat):
    return unflatten(g, [F(v) for v in flat])


def test_threshold_chain_example():
    g, _ = chain()
    assert threshold(g, at(g, 4, 0, 0, 0), 2, 1, 1) == 5


def test_threshold_friend_already_safe():
    g = EnvironmentGraph.build([2, 3], {(0, 1): 1}, {(0, 1): 1})
    assert threshold(g, StrategyMatrix.all_self(g), 0, 1, 1) == 0


def test_threshold_adversary_out_of_budget():
    g = EnvironmentGraph.build([2, 7], {(0, 1): -1}, {(0, 1): 1})
    assert threshold(g, StrategyMatrix.all_self(g), 0, 1, 1) is None
    assert threshold(g, StrategyMatrix.all_self(g), 0, 1, 0) == 0


def test_threshold_matches_fine_grid():
    """Algebraic minimum vs the smallest grid value reaching the target, step 1/4."""
    rng = random.Random(17)
    step = F(1, 4)
    checked = 0
    for _ in range(200):
        g, _ = random_game(rng, max_n=3, min_n=2)
        U = StrategyMatrix.all_self(g)
        flat = [F(rng.randint(0, 2)) for _ in g.flat_pairs]
        for i in range(g.n):   # keep i's own row free so all of [0, p_i] is available
            for k in g.flat_groups()[i]:
                flat[k] = F(0)
        try:
            U = unflatten(g, flat)
        except ValueError:
            continue
        for i in range(g.n):
            for j in g.neighbors(i):
                thr = threshold(g, U, i, j, 1)
                hits = []
                v = F(0)
                while v <= g.power[i]:
                    row = list(U.rows[i])
                    row[j], row[i] = v, g.power[i] - v
                    x = state_vector(g, U.with_row(i, row))
                    if reduce_state(g, x, i)[j] == 1:
                        hits.append(v)
                    v += step
                if thr is None:
                    assert not hits
                else:
                    assert hits and F(0) <= hits[0] - thr < step
                checked += 1
    assert checked > 100


def test_deviation_feasible_chain_interior():
    g, _ = chain()
    U = at(g, F(9, 2), 2, 6, 5)
    for target in itertools.product((0, 1), repeat=3):
        if target[1] == 1:
            assert not deviation_feasible(g, U, 1, target)
    assert deviation_feasible(g, U, 1, current_reduced(g, U, 1))


def test_single_country_cannot_die():
    g = EnvironmentGraph.build([3])
    U = StrategyMatrix.all_self(g)
    assert deviation_feasible(g, U, 0, (1,))
    assert not deviation_feasible(g, U, 0, (0,))


def test_isolated_best_response_keeps_power_home():
    g = EnvironmentGraph.build([3, 1], {}, {})
    prefs = Preferences.from_utilities(g, PairwiseUtilities.from_graph(g))
    dev = best_response(g, prefs, StrategyMatrix.all_self(g), 0)
    assert dev.row == (3, 0)


def test_best_response_from_zero_beats_every_integer_row():
    g, prefs = chain()
    U = at(g, 0, 0, 0, 0)
    for i in range(3):
        dev = best_response(g, prefs, U, i)
        check_row(g, i, dev.row)
        assert prefs.score(i, current_reduced(g, dev.apply(U), i)) == dev.score
        group = g.flat_groups()[i]
        p = int(g.power[i])
        for alt in itertools.product(range(p + 1), repeat=len(group)):
            if sum(alt) > p:
                continue
            row = [F(0)] * 3
            for k, v in zip(group, alt):
                row[g.flat_pairs[k][1]] = F(v)
            row[i] = p - sum(row)
            assert prefs.score(i, current_reduced(g, U.with_row(i, row), i)) <= dev.score


def test_best_response_never_worse_and_realises_its_score():
    rng = random.Random(4)
    for _ in range(150):
        g, prefs = random_game(rng, max_n=4)
        flat = []
        for i in range(g.n):
            group = g.flat_groups()[i]
            left = g.power[i]
            for _ in group:
                v = F(rng.randint(0, 8), 8) * left
                flat.append(v)
                left -= v
        U = unflatten(g, flat)
        for i in range(g.n):
            dev = best_response(g, prefs, U, i)
            check_row(g, i, dev.row)
            now = prefs.score(i, current_reduced(g, U, i))
            assert dev.score >= now
            assert prefs.score(i, current_reduced(g, dev.apply(U), i)) == dev.score
            assert (improves(g, prefs, U, i) is None) == (dev.score == now)


def test_is_equilibrium_matches_grid_oracle():
    g, prefs = chain()
    pts, eq = grid_equilibria(g, prefs)
    for p, ok in zip(pts, eq):
        assert is_equilibrium(g, prefs, at(g, *map(int, p))) == bool(ok)
    rng = random.Random(8)
    for _ in range(25):
        g, prefs = random_game(rng, max_n=3, max_power=4)
        pts, eq = grid_equilibria(g, prefs)
        for p, ok in zip(pts, eq):
            assert is_equilibrium(g, prefs, unflatten(g, [int(v) for v in p])) == bool(ok)


def test_critical_allocation_flip_point():
    g, _ = chain()
    U = at(g, 4, 0, 0, 2)
    c = critical_allocation(g, U, 2, 1)
    assert c == 5
    row = list(U.rows[2])
    row[1], row[2] = c, 5 - c
    assert state_vector(g, U.with_row(2, row))[1].at_risk
