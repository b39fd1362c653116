"""Exact enumeration of pure-strategy equilibrium classes as unions of polytopes.

Points live in the flat allocation space (one coordinate per ordered
friend/adversary allocation, self-allocations eliminated as slack).  For a
ternary label the cell is the strategy space intersected with one state
constraint per country.  A point of the cell is an equilibrium unless some
country can reach a strictly preferred reduced outcome; the set of opponent
allocations from which country ``i`` reaches a given target profile is the
Fourier-Motzkin projection of a small polyhedron, so the non-deviation
condition is a conjunction of disjunctions of linear constraints.  Cells are
split into pairwise-disjoint polytopes while subtracting those reach regions.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from ..model import STATES, EnvironmentGraph, Relation, State, format_states
from ..preferences import Preferences, reduce_state
from ..response import TargetProfile
from .formula import And, Atom, conjunction, split_by_variables
from .kernel import EQ, LE, LT, LinearConstraint, Polytope, eliminate, union_difference

DEFAULT_CAP = 5


class InstanceTooLarge(ValueError):
    """More countries than the enumeration cap allows."""


@dataclass(frozen=True)
class StrategySpace(Polytope):
    """The strategy space ``{A u <= p, -u <= 0}`` with its per-country blocks."""

    groups: tuple[tuple[int, ...], ...] = ()
    power: tuple[Fraction, ...] = ()

    def volume(self) -> Fraction:
        """Lebesgue volume: a product of scaled simplices."""
        vol = Fraction(1)
        for group, p in zip(self.groups, self.power):
            k = len(group)
            vol *= p ** k / math.factorial(k)
        return vol

    def incidence(self) -> list[list[int]]:
        rows = []
        for group in self.groups:
            s = set(group)
            rows.append([1 if k in s else 0 for k in range(self.dim)])
        return rows


def margin_form(g: EnvironmentGraph, j: int) -> tuple[tuple[Fraction, ...], Fraction]:
    """``sigma_j - tau_j`` as ``(coeffs, constant)`` over the flat variables."""
    index = g.flat_index()
    coeffs = [Fraction(0)] * len(index)
    for k in g.friends(j):
        coeffs[index[(j, k)]] -= 1
        coeffs[index[(k, j)]] += 1
    for k in g.adversaries(j):
        coeffs[index[(k, j)]] -= 1
    return tuple(coeffs), g.power[j]


def strategy_space(g: EnvironmentGraph) -> StrategySpace:
    groups = g.flat_groups()
    dim = len(g.flat_pairs)
    rows = []
    for i, group in enumerate(groups):
        s = set(group)
        rows.append(LinearConstraint(tuple(Fraction(1 if k in s else 0) for k in range(dim)), LE, g.power[i]))
    for k in range(dim):
        rows.append(LinearConstraint(tuple(Fraction(-1 if q == k else 0) for q in range(dim)), LE, Fraction(0)))
    return StrategySpace(dim, tuple(rows), groups=groups, power=g.power)


def power_constraints(g: EnvironmentGraph, i: int) -> And:
    """Nonnegative allocations by ``i`` whose sum stays within ``p_i``."""
    dim = len(g.flat_pairs)
    group = g.flat_groups()[i]
    if not group:
        return And()
    atoms = [LinearConstraint(tuple(Fraction(-1 if q == k else 0) for q in range(dim)), LE, Fraction(0))
             for k in group]
    s = set(group)
    atoms.append(LinearConstraint(tuple(Fraction(1 if q in s else 0) for q in range(dim)), LE, g.power[i]))
    return conjunction(atoms)


def state_constraint(g: EnvironmentGraph, j: int, state: State) -> LinearConstraint:
    coeffs, const = margin_form(g, j)
    neg = tuple(-c for c in coeffs)
    if state is State.SAFE:
        return LinearConstraint(neg, LT, const)          # margin > 0
    if state is State.PRECARIOUS:
        return LinearConstraint(coeffs, EQ, -const)      # margin == 0
    return LinearConstraint(coeffs, LT, -const)          # margin < 0


def state_constraints(g: EnvironmentGraph, label: Sequence[State], i: int) -> And:
    return And((Atom(state_constraint(g, i, label[i])),))


def best_response_constraints(g: EnvironmentGraph, label: Sequence[State], i: int) -> And:
    """State and power constraints of ``i`` and of each of its relations."""
    parts = []
    for j in (i,) + g.neighbors(i):
        parts.extend(state_constraints(g, label, j).children)
        parts.extend(power_constraints(g, j).children)
    return And(tuple(parts))


def classify_clauses(g: EnvironmentGraph, formula: And, i: int) -> tuple[list, list]:
    """Split the CNF of ``formula`` into clauses on ``i``'s own allocations and the rest."""
    return split_by_variables(formula.to_cnf(), frozenset(g.flat_groups()[i]))


def _target_rows(g: EnvironmentGraph, i: int, profile: TargetProfile) -> list[LinearConstraint]:
    rows = list(power_constraints(g, i).to_cnf())
    rows = [clause[0] for clause in rows]

    def bound(j, at_least_zero, strict):
        coeffs, const = margin_form(g, j)
        if at_least_zero:   # margin >= 0  (or > 0)
            return LinearConstraint(tuple(-c for c in coeffs), LT if strict else LE, const)
        return LinearConstraint(coeffs, LT if strict else LE, -const)   # margin <= 0 (or < 0)

    rows.append(bound(i, True, False) if profile.own else bound(i, False, True))
    for j, t in profile.targets:
        if g.relation(i, j) is Relation.FRIEND:
            rows.append(bound(j, True, False) if t else bound(j, False, True))
        else:
            rows.append(bound(j, False, False) if t else bound(j, True, True))
    return rows


@lru_cache(maxsize=4096)
def reach_region(g: EnvironmentGraph, i: int, profile: TargetProfile) -> Polytope | None:
    """Opponent allocations from which ``i`` can reach ``profile``; None if never."""
    dim = len(g.flat_pairs)
    rows = _target_rows(g, i, profile)
    projected = eliminate(rows, g.flat_groups()[i])
    if projected is None:
        return None
    return Polytope(dim, tuple(projected))


def _profiles(g: EnvironmentGraph, i: int):
    rel = g.neighbors(i)
    for bits in itertools.product((1, 0), repeat=1 + len(rel)):
        yield TargetProfile(i, bits[0], tuple(zip(rel, bits[1:])))


def preferred_targets(g: EnvironmentGraph, prefs: Preferences, label: Sequence[State], i: int):
    """Target profiles strictly better for ``i`` than the label's own outcome."""
    x = reduce_state(g, label, i)
    current = prefs.score(i, x)
    return [p for p in _profiles(g, i) if prefs.score(i, p.apply(x)) > current]


def non_deviation_filter(g: EnvironmentGraph, prefs: Preferences, label: Sequence[State],
                         cell: Polytope) -> list[Polytope]:
    """Disjoint polytopes covering the points of ``cell`` where nobody gains by deviating."""
    pieces = [cell] if cell.feasible() else []
    for i in range(g.n):
        for profile in preferred_targets(g, prefs, label, i):
            if not pieces:
                return []
            region = reach_region(g, i, profile)
            if region is None:
                continue
            pieces = union_difference(pieces, [region])
    return pieces


@dataclass
class EquilibriumClass:
    label: tuple[State, ...]
    polytopes: list[Polytope]
    volume: float | None = None
    volume_samples: int | None = None
    piece_volumes: list[float] = field(default_factory=list)

    @property
    def name(self) -> str:
        return format_states(self.label)

    def contains(self, point: Sequence) -> bool:
        return any(p.contains(point) for p in self.polytopes)

    def reduced(self, g: EnvironmentGraph, i: int):
        return reduce_state(g, self.label, i)

    def survival(self) -> tuple[int, ...]:
        return tuple(int(s.survives) for s in self.label)


def label_cell(g: EnvironmentGraph, label: Sequence[State], space: Polytope | None = None) -> Polytope:
    space = strategy_space(g) if space is None else space
    rows = [state_constraint(g, j, s) for j, s in enumerate(label)]
    return space.intersect(rows)


def _solve_label(args):
    g, prefs, label = args
    cell = label_cell(g, label)
    if not cell.feasible():
        return None
    pieces = non_deviation_filter(g, prefs, label, cell)
    if not pieces:
        return None
    return EquilibriumClass(tuple(label), [p.minimized() for p in pieces])


def enumerate_classes(g: EnvironmentGraph, prefs: Preferences, cap: int = DEFAULT_CAP,
                      workers: int = 1) -> list[EquilibriumClass]:
    """All nonempty equilibrium classes, one per ternary state label, in label order."""
    if g.n > cap:
        raise InstanceTooLarge(f"{g.n} countries exceed the enumeration cap of {cap}")
    labels = list(itertools.product(STATES, repeat=g.n))
    jobs = [(g, prefs, label) for label in labels]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_solve_label, jobs))
    else:
        results = [_solve_label(job) for job in jobs]
    return [r for r in results if r is not None]


def equilibrium_union(classes: Sequence[EquilibriumClass]) -> list[Polytope]:
    return [p for c in classes for p in c.polytopes]


# --------------------------------------------------------------------------
# Monte Carlo volume


def sample_space(space: StrategySpace, count: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform float samples from the product of scaled simplices."""
    pts = np.zeros((count, space.dim))
    for group, p in zip(space.groups, space.power):
        k = len(group)
        if not k:
            continue
        w = rng.dirichlet(np.ones(k + 1), size=count)[:, :k]
        pts[:, list(group)] = w * float(p)
    return pts


def _hits(poly: Polytope, pts: np.ndarray) -> np.ndarray:
    rows = [c for c in poly.constraints if not c.is_trivial()]
    if not rows:
        return np.ones(len(pts), dtype=bool)
    A = np.array([[float(a) for a in c.coeffs] for c in rows])
    b = np.array([float(c.bound) for c in rows])
    scale = 1e-12 * (1.0 + np.abs(A).sum(axis=1) + np.abs(b))
    return np.all(pts @ A.T <= b + scale, axis=1)


def estimate_volume(poly: Polytope, space: StrategySpace, samples: int, seed: int,
                    batch: int = 200_000) -> float:
    """Hit ratio of uniform strategy-space samples in ``poly`` times the space volume.

    Strict rows are relaxed to their closure; polytopes carrying a genuine
    equality have measure zero and get volume 0.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if not poly.feasible():
        return 0.0
    for c in poly.constraints:
        if c.rel == EQ and not c.is_trivial():
            return 0.0
    total = float(space.volume())
    if total == 0.0:
        return 0.0
    rng = np.random.default_rng(seed)
    hits = 0
    done = 0
    while done < samples:
        k = min(batch, samples - done)
        hits += int(_hits(poly, sample_space(space, k, rng)).sum())
        done += k
    return hits / samples * total


def attach_volumes(classes: Sequence[EquilibriumClass], space: StrategySpace, samples: int,
                   seed: int) -> None:
    """Fill in per-class volume estimates; each polytope gets its own seeded stream."""
    seq = np.random.SeedSequence(seed)
    streams = iter(seq.spawn(sum(len(c.polytopes) for c in classes)))
    for c in classes:
        vols = []
        for p in c.polytopes:
            sub = int(next(streams).generate_state(1)[0])
            vols.append(estimate_volume(p, space, samples, sub))
        c.piece_volumes = vols
        c.volume = float(sum(vols))
        c.volume_samples = samples

