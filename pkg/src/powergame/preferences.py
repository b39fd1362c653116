"""Reduced state vectors, per-country orders over them, and the pairwise utility.

A reduced vector is the binary recoding of a state vector seen from one
observing country: coordinate ``j`` is 1 when ``j`` is a friend (or the
observer itself, or an unrelated country) that survives, or an adversary that
is unsafe or precarious.
"""

from __future__ import annotations

import enum
import itertools
import re
from dataclasses import dataclass
from functools import cached_property
from fractions import Fraction
from typing import NamedTuple, Sequence

from .model import EnvironmentGraph, Relation, State, StrategyMatrix, as_fraction, state_vector

Reduced = tuple[int, ...]


def all_reduced(n: int) -> list[Reduced]:
    """All 2^n binary vectors, lexicographically descending (all-ones first)."""
    return [tuple(bits) for bits in itertools.product((1, 0), repeat=n)]


def reduce_state(g: EnvironmentGraph, x: Sequence[State], i: int) -> Reduced:
    out = []
    for j, s in enumerate(x):
        if g.relation(i, j) is Relation.ADVERSARY:
            out.append(1 if s.at_risk else 0)
        else:
            out.append(1 if s.survives else 0)
    return tuple(out)


def relevant_coordinates(g: EnvironmentGraph, i: int) -> tuple[int, ...]:
    """The observer itself and its friends and adversaries, ascending."""
    return tuple(sorted((i,) + g.neighbors(i)))


@dataclass(frozen=True)
class StateOrder:
    """Total preorder over the 2^n reduced vectors; ``tiers[0]`` is the best tier."""

    tiers: tuple[tuple[Reduced, ...], ...]

    def __post_init__(self):
        if not self.tiers or not self.tiers[0]:
            raise ValueError("an order needs at least one non-empty tier")
        n = len(self.tiers[0][0])
        seen = set()
        for tier in self.tiers:
            if not tier:
                raise ValueError("empty tier")
            for x in tier:
                if len(x) != n or any(b not in (0, 1) for b in x):
                    raise ValueError(f"malformed reduced vector {x}")
                if x in seen:
                    raise ValueError(f"vector {x} listed twice")
                seen.add(x)
        if len(seen) != 2 ** n:
            missing = sorted(set(all_reduced(n)) - seen, reverse=True)
            raise ValueError(f"order does not cover all 2^{n} vectors; missing {missing}")

    @property
    def n(self) -> int:
        return len(self.tiers[0][0])

    @cached_property
    def _rank(self) -> dict[Reduced, int]:
        return {x: k for k, tier in enumerate(self.tiers) for x in tier}

    def rank(self, x: Reduced) -> int:
        """Tier index of ``x``; lower is better."""
        return self._rank[tuple(x)]

    def format(self) -> str:
        return " > ".join(" ~ ".join("".join(map(str, x)) for x in tier) for tier in self.tiers)

    def __str__(self) -> str:
        return self.format()


_TIER_SPLIT = re.compile(r"\s*(?:>=|>|⪰|≻|≽)\s*")
_TIE_SPLIT = re.compile(r"\s*(?:~|∼)\s*")


def parse_order(text: str) -> StateOrder:
    """Parse ``"111 ~ 110 > 101 ~ 100 > ..."``; ``[1, 1, 0]`` spelling is accepted too."""
    tiers = []
    for chunk in _TIER_SPLIT.split(text.strip()):
        tier = []
        for item in _TIE_SPLIT.split(chunk):
            bits = re.sub(r"[\[\],\s]", "", item)
            if not bits or set(bits) - {"0", "1"}:
                raise ValueError(f"cannot parse reduced vector {item!r}")
            tier.append(tuple(int(b) for b in bits))
        tiers.append(tuple(tier))
    return StateOrder(tuple(tiers))


class Violation(NamedTuple):
    axiom: str  # "weak", "indifference" or "strong"
    lower: Reduced
    upper: Reduced


def validate_axioms(g: EnvironmentGraph, order: StateOrder, i: int) -> list[Violation]:
    """Pairs of reduced vectors on which ``order`` breaks a preference axiom for ``i``.

    weak: ``upper`` dominates ``lower`` on every relevant coordinate but is ranked
    strictly below it.  indifference: the two agree on every relevant coordinate
    but sit in different tiers.  strong: ``upper`` keeps ``i`` alive, ``lower``
    does not, yet ``upper`` is not strictly better.
    """
    if order.n != g.n:
        raise ValueError(f"order is over {order.n} countries, graph has {g.n}")
    rel = relevant_coordinates(g, i)
    vectors = all_reduced(g.n)
    out = []
    for u, v in itertools.product(vectors, repeat=2):
        if u == v:
            continue
        ru, rv = order.rank(u), order.rank(v)
        if all(v[j] >= u[j] for j in rel) and rv > ru:
            out.append(Violation("weak", u, v))
        if all(v[j] == u[j] for j in rel) and ru != rv and u < v:
            out.append(Violation("indifference", u, v))
        if v[i] == 1 and u[i] == 0 and rv >= ru:
            out.append(Violation("strong", u, v))
    return out


class Preference(enum.Enum):
    A = "a_strictly"
    B = "b_strictly"
    INDIFFERENT = "indifferent"


def prefer(orders: Sequence[StateOrder], i: int, a: Reduced, b: Reduced) -> Preference:
    ra, rb = orders[i].rank(a), orders[i].rank(b)
    if ra < rb:
        return Preference.A
    if rb < ra:
        return Preference.B
    return Preference.INDIFFERENT


@dataclass(frozen=True)
class PairwiseUtilities:
    """``alive[i][j]`` is t_ij(1) (diagonal included); ``dead[i]`` is t_ii(0)."""

    alive: tuple[tuple[Fraction, ...], ...]
    dead: tuple[Fraction, ...]

    def __post_init__(self):
        n = len(self.dead)
        if len(self.alive) != n or any(len(r) != n for r in self.alive):
            raise ValueError("utility matrix must be n x n")
        for row in self.alive:
            if any(w < 0 for w in row):
                raise ValueError("pairwise utilities must be nonnegative")
        for i in range(n):
            if self.alive[i][i] <= 0:
                raise ValueError(f"t_ii(1) must be positive for country {i}")

    @classmethod
    def from_graph(cls, g: EnvironmentGraph, self_weights: Sequence | None = None,
                   dead: Sequence | None = None) -> "PairwiseUtilities":
        """Relation importances as t_ij(1); self weights default to 1, t_ii(0) to 0."""
        n = g.n
        selfw = [Fraction(1)] * n if self_weights is None else [as_fraction(w) for w in self_weights]
        rows = []
        for i in range(n):
            rows.append(tuple(selfw[i] if j == i else
                              (g.weight(i, j) if j in g.neighbors(i) else Fraction(0))
                              for j in range(n)))
        d = tuple(Fraction(0) for _ in range(n)) if dead is None else tuple(as_fraction(v) for v in dead)
        return cls(tuple(rows), d)


def reduced_utility(g: EnvironmentGraph, tu: PairwiseUtilities, i: int, x: Reduced) -> Fraction:
    if not x[i]:
        return tu.dead[i]
    row = tu.alive[i]
    total = row[i]
    for j in g.neighbors(i):
        if x[j]:
            total += row[j]
    return total


def utility(g: EnvironmentGraph, tu: PairwiseUtilities, U: StrategyMatrix, i: int) -> Fraction:
    """t_ii(0) when ``i`` is unsafe, else t_ii(1) plus the weights of surviving
    friends and of adversaries that are unsafe or precarious."""
    return reduced_utility(g, tu, i, reduce_state(g, state_vector(g, U), i))


def order_from_utilities(g: EnvironmentGraph, tu: PairwiseUtilities, i: int) -> StateOrder:
    scored = sorted(((reduced_utility(g, tu, i, x), x) for x in all_reduced(g.n)),
                    key=lambda t: (-t[0], tuple(-b for b in t[1])))
    tiers = [list(group) for _, group in itertools.groupby(scored, key=lambda t: t[0])]
    return StateOrder(tuple(tuple(x for _, x in tier) for tier in tiers))


class Preferences:
    """Per-country scores over reduced vectors; larger is better.

    Built either from explicit :class:`StateOrder` tiers (score = minus the tier
    index) or from pairwise utilities (score = utility).  The two agree on every
    strict comparison when the order is the one induced by the utilities.
    """

    def __init__(self, tables: Sequence[dict], orders: Sequence[StateOrder] | None = None,
                 utilities: PairwiseUtilities | None = None):
        self._tables = list(tables)
        self._orders = list(orders) if orders is not None else None
        self.utilities = utilities
        # best-response candidate lists, filled lazily by the response module
        self.profile_cache: dict = {}

    @classmethod
    def from_orders(cls, orders: Sequence[StateOrder]) -> "Preferences":
        tables = [{x: -k for k, tier in enumerate(o.tiers) for x in tier} for o in orders]
        return cls(tables, orders=orders)

    @classmethod
    def from_utilities(cls, g: EnvironmentGraph, tu: PairwiseUtilities) -> "Preferences":
        tables = [{x: reduced_utility(g, tu, i, x) for x in all_reduced(g.n)} for i in range(g.n)]
        return cls(tables, utilities=tu)

    @property
    def n(self) -> int:
        return len(self._tables)

    @property
    def explicit(self) -> bool:
        return self._orders is not None

    def score(self, i: int, x: Reduced):
        return self._tables[i][x]

    def order(self, g: EnvironmentGraph, i: int) -> StateOrder:
        if self._orders is not None:
            return self._orders[i]
        return order_from_utilities(g, self.utilities, i)

    def orders(self, g: EnvironmentGraph) -> list[StateOrder]:
        return [self.order(g, i) for i in range(self.n)]


def check_preferences(g: EnvironmentGraph, prefs: Preferences) -> dict[int, list[Violation]]:
    """Axiom violations keyed by country; empty dict when everything is consistent."""
    out = {}
    for i in range(g.n):
        v = validate_axioms(g, prefs.order(g, i), i)
        if v:
            out[i] = v
    return out


def induced_orders(g: EnvironmentGraph, tu: PairwiseUtilities) -> list[StateOrder]:
    return [order_from_utilities(g, tu, i) for i in range(g.n)]

