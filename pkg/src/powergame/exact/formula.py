"""And/Or trees over linear atoms with CNF and DNF normalization."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

from .kernel import LinearConstraint, Polytope

Formula = Union["Atom", "And", "Or"]


@dataclass(frozen=True)
class Atom:
    constraint: LinearConstraint

    def holds(self, point: Sequence) -> bool:
        return self.constraint.holds(point)

    def to_cnf(self) -> list[list[LinearConstraint]]:
        return [[self.constraint]]

    def to_dnf(self) -> list[list[LinearConstraint]]:
        return [[self.constraint]]


@dataclass(frozen=True)
class And:
    children: tuple[Formula, ...] = ()

    def holds(self, point: Sequence) -> bool:
        return all(ch.holds(point) for ch in self.children)

    def to_cnf(self) -> list[list[LinearConstraint]]:
        return [clause for ch in self.children for clause in ch.to_cnf()]

    def to_dnf(self) -> list[list[LinearConstraint]]:
        terms: list[list[LinearConstraint]] = [[]]
        for ch in self.children:
            terms = [t + s for t, s in itertools.product(terms, ch.to_dnf())]
        return terms


@dataclass(frozen=True)
class Or:
    children: tuple[Formula, ...] = ()

    def holds(self, point: Sequence) -> bool:
        return any(ch.holds(point) for ch in self.children)

    def to_cnf(self) -> list[list[LinearConstraint]]:
        clauses: list[list[LinearConstraint]] = [[]]
        for ch in self.children:
            clauses = [c + d for c, d in itertools.product(clauses, ch.to_cnf())]
        return clauses

    def to_dnf(self) -> list[list[LinearConstraint]]:
        return [term for ch in self.children for term in ch.to_dnf()]


def conjunction(constraints: Iterable[LinearConstraint]) -> And:
    return And(tuple(Atom(c) for c in constraints))


def disjunction(constraints: Iterable[LinearConstraint]) -> Or:
    return Or(tuple(Atom(c) for c in constraints))


def cnf_holds(clauses: Sequence[Sequence[LinearConstraint]], point: Sequence) -> bool:
    return all(any(c.holds(point) for c in clause) for clause in clauses)


def dnf_holds(terms: Sequence[Sequence[LinearConstraint]], point: Sequence) -> bool:
    return any(all(c.holds(point) for c in term) for term in terms)


def cells(formula: Formula, dim: int, within: Polytope | None = None) -> list[Polytope]:
    """Feasible conjunctive cells of the DNF of ``formula`` (optionally clipped)."""
    base = within.constraints if within is not None else ()
    seen = set()
    out = []
    for term in formula.to_dnf():
        key = frozenset(c.normalized() for c in term)
        if key in seen:
            continue
        seen.add(key)
        cell = Polytope(dim, base + tuple(term))
        if cell.feasible():
            out.append(cell)
    return out


def split_by_variables(clauses: Sequence[Sequence[LinearConstraint]],
                       own: frozenset[int]) -> tuple[list, list]:
    """Partition clauses into those touching only ``own`` variables and the rest."""
    strat, cond = [], []
    for clause in clauses:
        support = frozenset().union(*(c.support for c in clause)) if clause else frozenset()
        (strat if support <= own else cond).append(list(clause))
    return strat, cond
