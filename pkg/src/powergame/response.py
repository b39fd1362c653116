"""Unilateral deviations against a fixed opponent profile.

Country ``i``'s row touches the state of ``i`` itself and of its relations
only, and each relation ``j`` only through the single entry ``u_ij``.  So for
every relation there is a critical allocation ``c_j`` with

* friend ``j`` survives        iff ``u_ij >= c_j``
* adversary ``j`` is at risk   iff ``u_ij >= c_j``

and ``i`` itself survives iff its total allocation to friends is at most its
survival slack.  A best response is found by enumerating the binary targets
over ``i`` and its relations and keeping the best reachable one.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .model import EnvironmentGraph, Relation, StrategyMatrix, margin, state_from_margin
from .preferences import Preferences, Reduced, reduce_state


@dataclass(frozen=True)
class TargetProfile:
    """Binary targets for country ``country`` on itself and its relations."""

    country: int
    own: int
    targets: tuple[tuple[int, int], ...]

    def apply(self, x: Reduced) -> Reduced:
        out = list(x)
        out[self.country] = self.own
        for j, t in self.targets:
            out[j] = t
        return tuple(out)

    @classmethod
    def from_reduced(cls, g: EnvironmentGraph, i: int, x: Reduced) -> "TargetProfile":
        return cls(i, x[i], tuple((j, x[j]) for j in g.neighbors(i)))


@dataclass(frozen=True)
class Deviation:
    country: int
    row: tuple[Fraction, ...]
    score: object = None
    profile: TargetProfile | None = None

    def apply(self, U: StrategyMatrix) -> StrategyMatrix:
        return U.with_row(self.country, self.row)


def critical_allocation(g: EnvironmentGraph, U: StrategyMatrix, i: int, j: int) -> Fraction:
    """``c_j``: the allocation ``u_ij`` at which ``j`` flips to its 1-coded state."""
    rel = g.relation(i, j)
    if rel is Relation.FRIEND:
        return -(margin(g, U, j) - U.rows[i][j])
    if rel is Relation.ADVERSARY:
        return margin(g, U, j) + U.rows[i][j]
    raise ValueError(f"{j} is not a relation of {i}")


def survival_slack(g: EnvironmentGraph, U: StrategyMatrix, i: int) -> Fraction:
    """``i`` survives iff the sum of its allocations to friends is at most this."""
    row = U.rows[i]
    return margin(g, U, i) + sum((row[j] for j in g.friends(i)), Fraction(0))


def threshold(g: EnvironmentGraph, U: StrategyMatrix, i: int, j: int, target: int) -> Fraction | None:
    """Smallest ``u_ij`` in ``[0, p_i]`` giving ``j`` the 1/0-coded ``target``; None if none does.

    The target 0 is reached by any ``u_ij < c_j``, so its minimum is 0 whenever
    ``c_j > 0``.
    """
    c = critical_allocation(g, U, i, j)
    if target:
        low = max(c, Fraction(0))
        return low if low <= g.power[i] else None
    return Fraction(0) if c > 0 else None


def _realize(g: EnvironmentGraph, i: int, own: int, targets: Sequence[tuple[int, int]],
             critical: dict, slack: Fraction) -> tuple[Fraction, ...] | None:
    p = g.power[i]
    row = [Fraction(0)] * g.n
    for j, t in targets:
        c = critical[j]
        if t:
            if c > 0:
                row[j] = c
        elif c <= 0:
            return None
    used = sum(row)
    if used > p:
        return None
    friends = g.friends(i)
    fsum = sum((row[j] for j in friends), Fraction(0))
    if own:
        if fsum > slack:
            return None
    elif fsum <= slack:
        # i has to give enough to friends to make itself unsafe
        gap = slack - fsum
        room = p - used
        hot = [j for j, t in targets if t and j in friends]
        if hot:
            if room <= gap:
                return None
            row[hot[0]] += room
        else:
            cold = [j for j, t in targets if not t and j in friends]
            cap = sum((critical[j] for j in cold), Fraction(0))
            if min(room, cap) <= gap:
                return None
            extra = room if room < cap else (gap + cap) / 2
            for j in cold:
                row[j] = critical[j] * extra / cap
    row[i] = p - sum(row)
    return tuple(row)


def realize_profile(g: EnvironmentGraph, U: StrategyMatrix, profile: TargetProfile) -> tuple[Fraction, ...] | None:
    """A row for ``profile.country`` reaching the profile against ``U``'s other rows, or None."""
    i = profile.country
    critical = {j: critical_allocation(g, U, i, j) for j in g.neighbors(i)}
    return _realize(g, i, profile.own, profile.targets, critical, survival_slack(g, U, i))


def deviation_feasible(g: EnvironmentGraph, U: StrategyMatrix, i: int, target: Reduced) -> bool:
    """Can ``i`` alone reach ``target`` on its own and its relations' coordinates?"""
    return realize_profile(g, U, TargetProfile.from_reduced(g, i, tuple(target))) is not None


def current_reduced(g: EnvironmentGraph, U: StrategyMatrix, i: int) -> Reduced:
    x = tuple(state_from_margin(margin(g, U, j)) for j in range(g.n))
    return reduce_state(g, x, i)


def _candidates(g: EnvironmentGraph, prefs: Preferences, i: int, x: Reduced):
    """Target profiles for ``i`` in best-first order given the other coordinates of ``x``."""
    cache = prefs.profile_cache
    rel = g.neighbors(i)
    fixed = tuple(b for j, b in enumerate(x) if j != i and j not in rel)
    key = (id(g), i, fixed)
    hit = cache.get(key)
    if hit is not None and hit[0] is g:
        return hit[1]
    out = []
    for bits in itertools.product((0, 1), repeat=1 + len(rel)):
        profile = TargetProfile(i, bits[0], tuple(zip(rel, bits[1:])))
        score = prefs.score(i, profile.apply(x))
        out.append((score, profile))
    out.sort(key=lambda t: (-t[0], -t[1].own, tuple(b for _, b in t[1].targets)))
    cache[key] = (g, out)
    return out


def best_response(g: EnvironmentGraph, prefs: Preferences, U: StrategyMatrix, i: int) -> Deviation:
    """An exact best response row for ``i`` with the others' rows held fixed.

    Ties in score go to own survival, then the lexicographically smallest
    relation targets; each profile is realised by its minimal allocations with
    the slack kept at home.
    """
    x = current_reduced(g, U, i)
    critical = {j: critical_allocation(g, U, i, j) for j in g.neighbors(i)}
    slack = survival_slack(g, U, i)
    for score, profile in _candidates(g, prefs, i, x):
        row = _realize(g, i, profile.own, profile.targets, critical, slack)
        if row is not None:
            return Deviation(i, row, score, profile)
    raise AssertionError("the current row always realises the current profile")


def improves(g: EnvironmentGraph, prefs: Preferences, U: StrategyMatrix, i: int) -> Deviation | None:
    """The best response when it strictly beats staying put, else None."""
    dev = best_response(g, prefs, U, i)
    if dev.score > prefs.score(i, current_reduced(g, U, i)):
        return dev
    return None


def is_equilibrium(g: EnvironmentGraph, prefs: Preferences, U: StrategyMatrix) -> bool:
    return all(improves(g, prefs, U, i) is None for i in range(g.n))
