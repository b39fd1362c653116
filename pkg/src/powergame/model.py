"""Environment graph, strategy matrices, support/threat and the state function.

All quantities are exact :class:`~fractions.Fraction` values.  Countries are
0-based internally.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence


class Relation(enum.IntEnum):
    ADVERSARY = -1
    NULL = 0
    FRIEND = 1


class State(enum.Enum):
    SAFE = "safe"
    PRECARIOUS = "precarious"
    UNSAFE = "unsafe"

    @property
    def survives(self) -> bool:
        return self is not State.UNSAFE

    @property
    def at_risk(self) -> bool:
        return self is not State.SAFE

    @property
    def code(self) -> str:
        return self.value[0].upper()


STATES = (State.SAFE, State.PRECARIOUS, State.UNSAFE)


class InvalidStrategy(ValueError):
    """Raised for matrices or rows that violate the allocation constraints."""


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("use exact rationals (int, str, Decimal or Fraction), not float")
    return Fraction(value)


def _pair(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class EnvironmentGraph:
    """Signed, undirected environment graph with country powers.

    ``relations`` and ``importance`` are keyed by unordered pairs ``(i, j)``
    with ``i < j``; pairs absent from ``relations`` are null.  Self-friendship
    is implicit and never stored.
    """

    power: tuple[Fraction, ...]
    relations: tuple[tuple[tuple[int, int], Relation], ...] = ()
    importance: tuple[tuple[tuple[int, int], Fraction], ...] = ()
    names: tuple[str, ...] | None = None
    _friends: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    _adversaries: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = len(self.power)
        if n < 1:
            raise ValueError("an environment graph needs at least one country")
        for p in self.power:
            if p < 0:
                raise ValueError(f"negative power {p}")
        friends = [[] for _ in range(n)]
        adversaries = [[] for _ in range(n)]
        seen = set()
        for (i, j), rel in self.relations:
            if not (0 <= i < j < n):
                raise ValueError(f"relation key {(i, j)} must satisfy 0 <= i < j < n")
            if (i, j) in seen:
                raise ValueError(f"duplicate relation for pair {(i, j)}")
            seen.add((i, j))
            if rel is Relation.FRIEND:
                friends[i].append(j)
                friends[j].append(i)
            elif rel is Relation.ADVERSARY:
                adversaries[i].append(j)
                adversaries[j].append(i)
            else:
                raise ValueError("null pairs are not stored as relations")
        weights = dict(self.importance)
        for key, w in weights.items():
            if not (0 <= w <= 1):
                raise ValueError(f"importance {w} for pair {key} outside [0, 1]")
            if key not in seen and w != 0:
                raise ValueError(f"null pair {key} must have importance 0")
        if self.names is not None and len(self.names) != n:
            raise ValueError("names must have one entry per country")
        object.__setattr__(self, "_friends", tuple(tuple(sorted(f)) for f in friends))
        object.__setattr__(self, "_adversaries", tuple(tuple(sorted(a)) for a in adversaries))

    @classmethod
    def build(cls, power: Sequence, relations: Mapping[tuple[int, int], int] | None = None,
              importance: Mapping[tuple[int, int], object] | None = None,
              names: Sequence[str] | None = None) -> "EnvironmentGraph":
        """Convenience constructor accepting loose pair keys and ints/strings."""
        rel = {}
        for (i, j), r in (relations or {}).items():
            if i == j:
                raise ValueError("self relations are implicit")
            r = Relation(r)
            if r is not Relation.NULL:
                key = _pair(i, j)
                if key in rel and rel[key] != r:
                    raise ValueError(f"conflicting relations for pair {key}")
                rel[key] = r
        imp = {}
        for (i, j), w in (importance or {}).items():
            key = _pair(i, j)
            w = as_fraction(w)
            if key in imp and imp[key] != w:
                raise ValueError(f"conflicting importances for pair {key}")
            imp[key] = w
        return cls(
            power=tuple(as_fraction(p) for p in power),
            relations=tuple(sorted(rel.items())),
            importance=tuple(sorted((k, w) for k, w in imp.items() if w or k in rel)),
            names=tuple(names) if names is not None else None,
        )

    @property
    def n(self) -> int:
        return len(self.power)

    @property
    def m(self) -> int:
        """Number of friend or adversary edges."""
        return len(self.relations)

    @cached_property
    def _relation_map(self) -> dict:
        return dict(self.relations)

    @cached_property
    def _weight_map(self) -> dict:
        return dict(self.importance)

    def relation(self, i: int, j: int) -> Relation:
        if i == j:
            return Relation.FRIEND
        return self._relation_map.get(_pair(i, j), Relation.NULL)

    def weight(self, i: int, j: int) -> Fraction:
        return self._weight_map.get(_pair(i, j), Fraction(0))

    def friends(self, i: int) -> tuple[int, ...]:
        """Friends of ``i`` other than ``i`` itself."""
        return self._friends[i]

    def adversaries(self, i: int) -> tuple[int, ...]:
        return self._adversaries[i]

    def neighbors(self, i: int) -> tuple[int, ...]:
        return self._neighbors[i]

    @cached_property
    def _neighbors(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(sorted(f + a)) for f, a in zip(self._friends, self._adversaries))

    def name(self, i: int) -> str:
        return self.names[i] if self.names else str(i + 1)

    # flat coordinates -----------------------------------------------------

    @cached_property
    def flat_pairs(self) -> tuple[tuple[int, int], ...]:
        """Ordered allocations ``(i, j)``, ``j != i`` a relation of ``i``, row-major."""
        return tuple((i, j) for i in range(self.n) for j in self.neighbors(i))

    def flat_groups(self) -> tuple[tuple[int, ...], ...]:
        """For each country the flat indices of its own allocations."""
        groups = [[] for _ in range(self.n)]
        for k, (i, _) in enumerate(self.flat_pairs):
            groups[i].append(k)
        return tuple(tuple(g) for g in groups)

    def flat_index(self) -> dict[tuple[int, int], int]:
        return {pair: k for k, pair in enumerate(self.flat_pairs)}

    def flat_names(self) -> list[str]:
        return [f"u[{self.name(i)},{self.name(j)}]" for i, j in self.flat_pairs]


@dataclass(frozen=True)
class StrategyMatrix:
    """Nonnegative n x n allocation matrix; build through :meth:`build`."""

    rows: tuple[tuple[Fraction, ...], ...]

    @classmethod
    def build(cls, g: EnvironmentGraph, rows: Sequence[Sequence]) -> "StrategyMatrix":
        if len(rows) != g.n:
            raise InvalidStrategy(f"expected {g.n} rows, got {len(rows)}")
        out = tuple(check_row(g, i, row) for i, row in enumerate(rows))
        return cls(out)

    @classmethod
    def all_self(cls, g: EnvironmentGraph) -> "StrategyMatrix":
        n = g.n
        return cls(tuple(tuple(g.power[i] if j == i else Fraction(0) for j in range(n))
                         for i in range(n)))

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self.rows[i][j]

    def with_row(self, i: int, row: Sequence[Fraction]) -> "StrategyMatrix":
        rows = list(self.rows)
        rows[i] = tuple(row)
        return StrategyMatrix(tuple(rows))


def check_row(g: EnvironmentGraph, i: int, row: Sequence) -> tuple[Fraction, ...]:
    if len(row) != g.n:
        raise InvalidStrategy(f"row {i} has {len(row)} entries, expected {g.n}")
    row = tuple(as_fraction(v) for v in row)
    allowed = set(g.neighbors(i)) | {i}
    for j, v in enumerate(row):
        if v < 0:
            raise InvalidStrategy(f"negative allocation u[{i},{j}] = {v}")
        if v and j not in allowed:
            raise InvalidStrategy(f"u[{i},{j}] = {v} but {j} is not a relation of {i}")
    if sum(row) != g.power[i]:
        raise InvalidStrategy(f"row {i} sums to {sum(row)}, expected {g.power[i]}")
    return row


def total_support(g: EnvironmentGraph, U: StrategyMatrix, i: int) -> Fraction:
    """Friends' allocations to ``i`` (self included) plus ``i``'s attacks on its adversaries."""
    rows = U.rows
    s = rows[i][i]
    for j in g.friends(i):
        s += rows[j][i]
    for j in g.adversaries(i):
        s += rows[i][j]
    return s


def total_threat(g: EnvironmentGraph, U: StrategyMatrix, i: int) -> Fraction:
    rows = U.rows
    return sum((rows[j][i] for j in g.adversaries(i)), Fraction(0))


def margin(g: EnvironmentGraph, U: StrategyMatrix, i: int) -> Fraction:
    """``sigma_i - tau_i``; its sign decides the state."""
    return total_support(g, U, i) - total_threat(g, U, i)


def state_from_margin(value) -> State:
    if value > 0:
        return State.SAFE
    if value == 0:
        return State.PRECARIOUS
    return State.UNSAFE


def state_vector(g: EnvironmentGraph, U: StrategyMatrix) -> tuple[State, ...]:
    return tuple(state_from_margin(margin(g, U, i)) for i in range(g.n))


def flatten(g: EnvironmentGraph, U: StrategyMatrix) -> tuple[Fraction, ...]:
    return tuple(U.rows[i][j] for i, j in g.flat_pairs)


def unflatten(g: EnvironmentGraph, flat: Sequence) -> StrategyMatrix:
    pairs = g.flat_pairs
    if len(flat) != len(pairs):
        raise InvalidStrategy(f"flat vector has {len(flat)} entries, expected {len(pairs)}")
    rows = [[Fraction(0)] * g.n for _ in range(g.n)]
    for (i, j), v in zip(pairs, flat):
        v = as_fraction(v)
        if v < 0:
            raise InvalidStrategy(f"negative flat allocation u[{i},{j}] = {v}")
        rows[i][j] = v
    for i in range(g.n):
        slack = g.power[i] - sum(rows[i])
        if slack < 0:
            raise InvalidStrategy(f"country {i} allocates more than its power {g.power[i]}")
        rows[i][i] = slack
    return StrategyMatrix(tuple(tuple(r) for r in rows))


def format_states(x: Iterable[State]) -> str:
    return "".join(s.code for s in x)


def parse_states(text: str) -> tuple[State, ...]:
    lookup = {s.code: s for s in State}
    lookup.update({s.value: s for s in State})
    text = text.strip()
    if "," in text or " " in text:
        parts = [t for t in text.replace(",", " ").split()]
    else:
        parts = list(text)
    try:
        return tuple(lookup[p.upper() if len(p) == 1 else p.lower()] for p in parts)
    except KeyError as exc:
        raise ValueError(f"unknown state {exc.args[0]!r}") from None
