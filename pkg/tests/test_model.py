from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from powergame.model import (
    EnvironmentGraph, InvalidStrategy, Relation, State, StrategyMatrix, flatten, format_states,
    margin, parse_states, state_vector, total_support, total_threat, unflatten,
)

F = Fraction


def chain_graph():
    return EnvironmentGraph.build([5, 9, 5], {(0, 1): -1, (1, 2): -1}, {(0, 1): 1, (1, 2): 1})


def chain_matrix(a, b, c, d):
    return StrategyMatrix.build(chain_graph(), [
        [5 - a, a, 0],
        [b, 9 - b - c, c],
        [0, d, 5 - d],
    ])


@st.composite
def games(draw, max_n=4):
    n = draw(st.integers(1, max_n))
    power = [draw(st.integers(0, 7)) for _ in range(n)]
    rel = {}
    for i in range(n):
        for j in range(i + 1, n):
            r = draw(st.sampled_from([-1, 0, 1]))
            if r:
                rel[(i, j)] = r
    g = EnvironmentGraph.build(power, rel, {k: F(1, 2) for k in rel})
    rows = []
    for i in range(n):
        support = sorted((i,) + g.neighbors(i))
        cuts = sorted(draw(st.lists(st.fractions(0, 1, max_denominator=12), min_size=len(support) - 1,
                                    max_size=len(support) - 1)))
        parts = [b - a for a, b in zip([F(0)] + cuts, cuts + [F(1)])]
        row = [F(0)] * n
        for j, w in zip(support, parts):
            row[j] = w * g.power[i]
        rows.append(row)
    return g, StrategyMatrix.build(g, rows)


def support_oracle(g, U, i):
    """Double loop straight from the definition over all ordered pairs."""
    total = F(0)
    for j in range(g.n):
        for k in range(g.n):
            r = Relation.FRIEND if j == k else g.relation(j, k)
            if k == i and r is Relation.FRIEND:
                total += U.rows[j][k]
            if j == i and r is Relation.ADVERSARY:
                total += U.rows[j][k]
    return total


def threat_oracle(g, U, i):
    return sum((U.rows[j][i] for j in range(g.n) if j != i and g.relation(i, j) is Relation.ADVERSARY), F(0))


def test_support_chain_example():
    assert total_support(chain_graph(), chain_matrix(4, 0, 5, 5), 0) == 5


def test_isolated_support_is_power():
    g = EnvironmentGraph.build([3])
    assert total_support(g, StrategyMatrix.all_self(g), 0) == 3
    assert total_threat(g, StrategyMatrix.all_self(g), 0) == 0


def test_threat_chain_example():
    assert total_threat(chain_graph(), chain_matrix(0, 3, 0, 0), 0) == 3


def test_state_vector_chain_example():
    assert state_vector(chain_graph(), chain_matrix(4, 0, 5, 5)) == (State.SAFE, State.PRECARIOUS, State.PRECARIOUS)


def test_all_null_all_safe_and_zero_power_precarious():
    g = EnvironmentGraph.build([1, 2, 3])
    assert state_vector(g, StrategyMatrix.all_self(g)) == (State.SAFE,) * 3
    g0 = EnvironmentGraph.build([0])
    assert state_vector(g0, StrategyMatrix.all_self(g0)) == (State.PRECARIOUS,)


@settings(max_examples=200, deadline=None)
@given(games())
def test_support_threat_match_summation_oracle(gu):
    g, U = gu
    for i in range(g.n):
        assert total_support(g, U, i) == support_oracle(g, U, i)
        assert total_threat(g, U, i) == threat_oracle(g, U, i)


@settings(max_examples=100, deadline=None)
@given(games(), games(), st.fractions(0, 1, max_denominator=10))
def test_support_is_linear(gu, _, alpha):
    g, U = gu
    V = StrategyMatrix.all_self(g)
    W = StrategyMatrix(tuple(tuple(alpha * x + (1 - alpha) * y for x, y in zip(r, s))
                             for r, s in zip(U.rows, V.rows)))
    for i in range(g.n):
        assert total_support(g, W, i) == alpha * total_support(g, U, i) + (1 - alpha) * total_support(g, V, i)


@settings(max_examples=100, deadline=None)
@given(games(), st.fractions(min_value=F(1, 10), max_value=10, max_denominator=10))
def test_state_vector_scale_invariant(gu, scale):
    g, U = gu
    g2 = EnvironmentGraph(tuple(p * scale for p in g.power), g.relations, g.importance)
    U2 = StrategyMatrix(tuple(tuple(x * scale for x in r) for r in U.rows))
    assert state_vector(g, U) == state_vector(g2, U2)


@settings(max_examples=200, deadline=None)
@given(games())
def test_flatten_roundtrip(gu):
    g, U = gu
    flat = flatten(g, U)
    assert len(flat) == 2 * g.m
    assert unflatten(g, flat) == U
    assert flatten(g, unflatten(g, flat)) == flat


def test_chain_flat_order_is_abcd():
    g = chain_graph()
    assert flatten(g, chain_matrix(1, 2, 3, 4)) == (1, 2, 3, 4)
    assert EnvironmentGraph.build([2, 3]).flat_pairs == ()


def test_unflatten_rejects_bad_vectors():
    g = chain_graph()
    with pytest.raises(InvalidStrategy):
        unflatten(g, [6, 0, 0, 0])
    with pytest.raises(InvalidStrategy):
        unflatten(g, [0, 5, 5, 0])
    with pytest.raises(InvalidStrategy):
        unflatten(g, [-1, 0, 0, 0])
    with pytest.raises(InvalidStrategy):
        unflatten(g, [0, 0, 0])


def test_matrix_validation():
    g = chain_graph()
    with pytest.raises(InvalidStrategy):
        StrategyMatrix.build(g, [[5, 0, 0], [0, 9, 0], [1, 0, 4]])  # 1 and 3 unrelated
    with pytest.raises(InvalidStrategy):
        StrategyMatrix.build(g, [[4, 0, 0], [0, 9, 0], [0, 0, 5]])
    with pytest.raises(TypeError):
        StrategyMatrix.build(g, [[5.0, 0, 0], [0, 9, 0], [0, 0, 5]])


def test_graph_validation():
    with pytest.raises(ValueError):
        EnvironmentGraph.build([1, 1], {(0, 1): 1, (1, 0): -1})
    with pytest.raises(ValueError):
        EnvironmentGraph.build([1, 1], {}, {(0, 1): F(1, 2)})
    with pytest.raises(ValueError):
        EnvironmentGraph.build([-1])
    with pytest.raises(ValueError):
        EnvironmentGraph.build([1, 1], {(0, 1): 1}, {(0, 1): 2})
    g = EnvironmentGraph.build([1, 1, 1], {(1, 0): 1, (2, 1): -1})
    assert g.relation(0, 1) is g.relation(1, 0) is Relation.FRIEND
    assert g.relation(2, 2) is Relation.FRIEND
    assert g.m == 2


def test_margin_and_state_codes():
    g = chain_graph()
    U = chain_matrix(4, 0, 5, 5)
    assert [margin(g, U, i) for i in range(3)] == [5, 0, 0]
    assert format_states(state_vector(g, U)) == "SPP"
    assert parse_states("SPU") == (State.SAFE, State.PRECARIOUS, State.UNSAFE)
    assert parse_states("safe, unsafe") == (State.SAFE, State.UNSAFE)
