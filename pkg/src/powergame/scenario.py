"""Line-oriented scenario files.

Example::

    # three countries, adversary chain
    countries: 3
    names: A B C
    power: 5 9 5
    sim: q=1000 rounds=50 mode=async seed=0
    order 1: 111 ~ 110 > 101 ~ 100 > 010 ~ 011 ~ 001 ~ 000
    1 1 1 1
    1 2 -1 1
    2 3 -1 1

Relation rows are ``first second type importance`` with 1-based country ids.
A self row ``i i 1 w`` sets ``t_ii(1) = w`` (default 1).  Numbers are read as
exact rationals (``0.139``, ``3/7``).  Either every country gets an ``order``
line or none does; without orders the preferences are induced from the
pairwise utilities.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .model import EnvironmentGraph, Relation
from .preferences import PairwiseUtilities, Preferences, StateOrder, parse_order

log = logging.getLogger(__name__)

SIM_KEYS = {"q": int, "rounds": int, "mode": str, "seed": int}
IMPORTANCE_LATTICE = 10 ** 6


class ScenarioError(ValueError):
    """Malformed or inconsistent scenario text."""


def parse_number(text: str) -> Fraction:
    try:
        value = Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise ScenarioError(f"not a number: {text!r}") from None
    return value


def format_number(x: Fraction) -> str:
    """Shortest exact spelling: an integer, a finite decimal or ``p/q``."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    d = x.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return f"{x.numerator}/{x.denominator}"
    places = max(twos, fives)
    scaled = x * 10 ** places
    sign = "-" if scaled < 0 else ""
    digits = str(abs(scaled.numerator)).rjust(places + 1, "0")
    return f"{sign}{digits[:-places]}.{digits[-places:]}"


@dataclass
class Scenario:
    graph: EnvironmentGraph
    self_weights: tuple[Fraction, ...]
    orders: tuple[StateOrder, ...] | None = None
    sim: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.graph.n

    def utilities(self) -> PairwiseUtilities:
        return PairwiseUtilities.from_graph(self.graph, self_weights=self.self_weights)

    def preferences(self) -> Preferences:
        if self.orders is not None:
            return Preferences.from_orders(self.orders)
        return Preferences.from_utilities(self.graph, self.utilities())


def _header(line: str):
    m = re.match(r"^\s*([A-Za-z]+)(?:\s+(\d+))?\s*:\s*(.*)$", line)
    if not m:
        return None
    return m.group(1).lower(), m.group(2), m.group(3).strip()


def parse_scenario(text: str, strict: bool = False) -> Scenario:
    """Parse and validate scenario text.

    A null row carrying a nonzero importance is an error when ``strict``;
    otherwise the importance is dropped and a warning recorded.
    """
    count = names = power = None
    sim: dict = {}
    orders: dict[int, StateOrder] = {}
    rows: dict[tuple[int, int], tuple[int, Fraction, int]] = {}
    warnings: list[str] = []

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head = _header(line)
        if head:
            key, idx, rest = head
            if key == "countries":
                try:
                    count = int(rest)
                except ValueError:
                    raise ScenarioError(f"line {lineno}: bad country count {rest!r}") from None
                if count <= 0:
                    raise ScenarioError(f"line {lineno}: country count must be positive")
            elif key == "names":
                names = tuple(rest.split())
            elif key == "power":
                power = tuple(parse_number(t) for t in rest.replace(",", " ").split())
            elif key == "sim":
                for item in rest.split():
                    k, _, v = item.partition("=")
                    if k not in SIM_KEYS or not v:
                        raise ScenarioError(f"line {lineno}: unknown sim option {item!r}")
                    try:
                        sim[k] = SIM_KEYS[k](v)
                    except ValueError:
                        raise ScenarioError(f"line {lineno}: bad value in {item!r}") from None
            elif key == "order":
                if idx is None:
                    raise ScenarioError(f"line {lineno}: order needs a country id, e.g. 'order 1:'")
                i = int(idx) - 1
                if i in orders:
                    raise ScenarioError(f"line {lineno}: second order for country {idx}")
                try:
                    orders[i] = parse_order(rest)
                except ValueError as exc:
                    raise ScenarioError(f"line {lineno}: {exc}") from None
            else:
                raise ScenarioError(f"line {lineno}: unknown header {key!r}")
            continue

        parts = line.replace(",", " ").replace("&", " ").split()
        if len(parts) != 4:
            raise ScenarioError(f"line {lineno}: expected 'first second type importance', got {raw!r}")
        try:
            a, b, t = int(parts[0]), int(parts[1]), int(parts[2])
        except ValueError:
            raise ScenarioError(f"line {lineno}: country ids and type must be integers") from None
        w = parse_number(parts[3])
        if t not in (-1, 0, 1):
            raise ScenarioError(f"line {lineno}: unknown relation type {t}")
        if not (0 <= w <= 1):
            raise ScenarioError(f"line {lineno}: importance {parts[3]} outside [0, 1]")
        if a < 1 or b < 1:
            raise ScenarioError(f"line {lineno}: country ids are 1-based")
        key = (min(a, b) - 1, max(a, b) - 1)
        if key in rows and rows[key][:2] != (t, w):
            raise ScenarioError(f"line {lineno}: conflicts with line {rows[key][2]} for pair {a}-{b}")
        rows.setdefault(key, (t, w, lineno))

    if power is None:
        raise ScenarioError("missing 'power:' line")
    if count is None:
        count = len(power)
    if count <= 0:
        raise ScenarioError("country count must be positive")
    if len(power) != count:
        raise ScenarioError(f"{len(power)} power values for {count} countries")
    if names is not None and len(names) != count:
        raise ScenarioError(f"{len(names)} names for {count} countries")

    selfw = [Fraction(1)] * count
    relations, importance = {}, {}
    for (i, j), (t, w, lineno) in sorted(rows.items()):
        if j >= count:
            raise ScenarioError(f"line {lineno}: country {j + 1} out of range 1..{count}")
        if i == j:
            if t != 1:
                raise ScenarioError(f"line {lineno}: self row must have type 1")
            if w <= 0:
                raise ScenarioError(f"line {lineno}: self importance must be positive")
            selfw[i] = w
            continue
        if t == 0:
            if w != 0:
                msg = f"line {lineno}: null pair {i + 1}-{j + 1} has importance {format_number(w)}; using 0"
                if strict:
                    raise ScenarioError(msg)
                warnings.append(msg)
                log.warning(msg)
            continue
        relations[(i, j)] = t
        importance[(i, j)] = w

    order_tuple = None
    if orders:
        missing = [i + 1 for i in range(count) if i not in orders]
        extra = [i + 1 for i in orders if i >= count]
        if extra:
            raise ScenarioError(f"orders given for unknown countries {extra}")
        if missing:
            raise ScenarioError(f"orders missing for countries {missing}; give all or none")
        order_tuple = tuple(orders[i] for i in range(count))
        for i, o in enumerate(order_tuple):
            if o.n != count:
                raise ScenarioError(f"order for country {i + 1} is over {o.n} countries")

    try:
        g = EnvironmentGraph.build(power, relations, importance, names)
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None
    return Scenario(g, tuple(selfw), order_tuple, sim, warnings)


def serialize_scenario(s: Scenario) -> str:
    """Canonical text: headers, self rows, then each unordered pair once with i < j."""
    g = s.graph
    out = [f"countries: {g.n}"]
    if g.names:
        out.append("names: " + " ".join(g.names))
    out.append("power: " + " ".join(format_number(p) for p in g.power))
    if s.sim:
        out.append("sim: " + " ".join(f"{k}={s.sim[k]}" for k in SIM_KEYS if k in s.sim))
    if s.orders is not None:
        for i, o in enumerate(s.orders):
            out.append(f"order {i + 1}: {o.format()}")
    for i in range(g.n):
        out.append(f"{i + 1} {i + 1} 1 {format_number(s.self_weights[i])}")
    for i in range(g.n):
        for j in range(i + 1, g.n):
            r = g.relation(i, j)
            out.append(f"{i + 1} {j + 1} {int(r)} {format_number(g.weight(i, j))}")
    return "\n".join(out) + "\n"


def randomize_scenario(n: int, power: Sequence, seed: int, names: Sequence[str] | None = None) -> Scenario:
    """Uniform relation types per pair and lattice importances in (0, 1] for non-null pairs."""
    if n < 1:
        raise ScenarioError("n must be at least 1")
    if len(power) != n:
        raise ScenarioError(f"{len(power)} power values for {n} countries")
    rng = np.random.default_rng(seed)
    types = (Relation.FRIEND, Relation.ADVERSARY, Relation.NULL)
    relations, importance = {}, {}
    for i in range(n):
        for j in range(i + 1, n):
            r = types[int(rng.integers(3))]
            w = Fraction(int(rng.integers(1, IMPORTANCE_LATTICE + 1)), IMPORTANCE_LATTICE)
            if r is not Relation.NULL:
                relations[(i, j)] = int(r)
                importance[(i, j)] = w
    g = EnvironmentGraph.build([Fraction(p) if not isinstance(p, float) else parse_number(repr(p))
                                for p in power], relations, importance, names)
    return Scenario(g, tuple(Fraction(1) for _ in range(n)))
