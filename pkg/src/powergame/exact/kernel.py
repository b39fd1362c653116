"""Exact rational linear feasibility, projection and polytope algebra.

Everything here works over :class:`fractions.Fraction` at the interface and
over ``gmpy2.mpq`` inside the simplex tableau.  Strict inequalities are
honoured exactly: a system with strict rows is feasible iff the LP
``max t  s.t.  a.x + t <= b (strict rows), t <= 1`` has a positive optimum.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from gmpy2 import mpq

LE = "<="
LT = "<"
EQ = "=="
_RELATIONS = (LE, LT, EQ)


def _frac(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("binary floats are not accepted in exact constraints")
    if type(value).__name__ == "mpq":
        return Fraction(int(value.numerator), int(value.denominator))
    return Fraction(value)


@dataclass(frozen=True)
class LinearConstraint:
    """``coeffs . x  rel  bound`` with ``rel`` one of ``<=``, ``<``, ``==``."""

    coeffs: tuple[Fraction, ...]
    rel: str
    bound: Fraction

    def __post_init__(self):
        if self.rel not in _RELATIONS:
            raise ValueError(f"unknown relation {self.rel!r}")

    @classmethod
    def make(cls, coeffs: Iterable, rel: str, bound) -> "LinearConstraint":
        return cls(tuple(_frac(c) for c in coeffs), rel, _frac(bound))

    @classmethod
    def geq(cls, coeffs: Iterable, bound, strict: bool = False) -> "LinearConstraint":
        """``coeffs . x >= bound`` (or ``>`` when strict)."""
        return cls(tuple(-_frac(c) for c in coeffs), LT if strict else LE, -_frac(bound))

    @property
    def dim(self) -> int:
        return len(self.coeffs)

    @property
    def strict(self) -> bool:
        return self.rel == LT

    @property
    def support(self) -> frozenset[int]:
        return frozenset(k for k, c in enumerate(self.coeffs) if c)

    def is_trivial(self) -> bool:
        return not any(self.coeffs)

    def trivially_true(self) -> bool:
        """Only meaningful for trivial (all-zero) rows."""
        return _compare(Fraction(0), self.rel, self.bound)

    def lhs(self, point: Sequence) -> Fraction:
        return sum((c * x for c, x in zip(self.coeffs, point) if c), Fraction(0))

    def holds(self, point: Sequence) -> bool:
        return _compare(self.lhs(point), self.rel, self.bound)

    def negate(self) -> "LinearConstraint":
        if self.rel == EQ:
            raise ValueError("the negation of an equality is a disjunction")
        neg = tuple(-c for c in self.coeffs)
        return LinearConstraint(neg, LE if self.rel == LT else LT, -self.bound)

    def closure(self) -> "LinearConstraint":
        return LinearConstraint(self.coeffs, LE, self.bound) if self.rel == LT else self

    def normalized(self) -> "LinearConstraint":
        lead = next((c for c in self.coeffs if c), None)
        if lead is None:
            return self
        scale = abs(lead) if self.rel != EQ else lead
        return LinearConstraint(tuple(c / scale for c in self.coeffs), self.rel, self.bound / scale)

    def format(self, names: Sequence[str] | None = None) -> str:
        names = names or [f"x{k}" for k in range(self.dim)]
        terms = []
        for c, name in zip(self.coeffs, names):
            if not c:
                continue
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            body = name if mag == 1 else f"{mag}*{name}"
            terms.append((sign, body))
        if not terms:
            lhs = "0"
        else:
            first_sign, first = terms[0]
            lhs = ("-" if first_sign == "-" else "") + first
            lhs += "".join(f" {s} {b}" for s, b in terms[1:])
        return f"{lhs} {self.rel} {self.bound}"

    def __str__(self) -> str:
        return self.format()


def _compare(lhs, rel, rhs) -> bool:
    if rel == LE:
        return lhs <= rhs
    if rel == LT:
        return lhs < rhs
    return lhs == rhs


# --------------------------------------------------------------------------
# simplex over mpq


class _Tableau:
    def __init__(self, rows, rhs, basis, ncols):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.ncols = ncols

    def pivot(self, r, c, objective):
        row = self.rows[r]
        piv = row[c]
        if piv != 1:
            inv = 1 / piv
            for j in range(self.ncols):
                if row[j]:
                    row[j] *= inv
            self.rhs[r] *= inv
        nz = [(j, v) for j, v in enumerate(row) if v]
        rr = self.rhs[r]
        for k, other in enumerate(self.rows):
            if k == r:
                continue
            f = other[c]
            if f:
                for j, v in nz:
                    other[j] -= f * v
                self.rhs[k] -= f * rr
        f = objective[0][c]
        if f:
            obj = objective[0]
            for j, v in nz:
                obj[j] -= f * v
            objective[1] -= f * rr
        self.basis[r] = c

    def optimize(self, objective, allowed):
        """Bland's rule; objective = [reduced-cost row, value]. Max problem."""
        while True:
            obj = objective[0]
            enter = next((j for j in range(self.ncols) if allowed[j] and obj[j] < 0), None)
            if enter is None:
                return "optimal"
            best = None
            for r, row in enumerate(self.rows):
                a = row[enter]
                if a > 0:
                    ratio = self.rhs[r] / a
                    key = (ratio, self.basis[r])
                    if best is None or key < best[0]:
                        best = (key, r)
            if best is None:
                return "unbounded"
            self.pivot(best[1], enter, objective)


def _solve_lp(rows, rels, rhs, nonneg, objective):
    """Maximize ``objective . x`` subject to ``rows x rels rhs``.

    ``rels`` entries are LE or EQ only; ``nonneg[j]`` marks variables with an
    implicit lower bound of zero, the rest are free.  Returns
    ``(status, x, value)`` with status in {optimal, infeasible, unbounded}.
    """
    nvar = len(nonneg)
    # column layout: one column per variable, plus a negative part for free ones
    col_of = []
    ncols = 0
    for j in range(nvar):
        if nonneg[j]:
            col_of.append((ncols, None))
            ncols += 1
        else:
            col_of.append((ncols, ncols + 1))
            ncols += 2
    m = len(rows)
    slack_col = {}
    for r in range(m):
        if rels[r] == LE:
            slack_col[r] = ncols
            ncols += 1
    art_col = {}
    t_rows = []
    t_rhs = []
    basis = []
    for r in range(m):
        row = rows[r]
        sign = -1 if rhs[r] < 0 else 1
        line = [mpq(0)] * ncols
        for j in range(nvar):
            a = row[j]
            if a:
                pos, neg = col_of[j]
                line[pos] = sign * a
                if neg is not None:
                    line[neg] = -sign * a
        if r in slack_col:
            line[slack_col[r]] = mpq(sign)
        t_rows.append(line)
        t_rhs.append(sign * rhs[r])
        if r in slack_col and sign == 1:
            basis.append(slack_col[r])
        else:
            basis.append(None)
    # artificials
    for r in range(m):
        if basis[r] is None:
            art_col[r] = ncols
            ncols += 1
    for line in t_rows:
        line.extend([mpq(0)] * (ncols - len(line)))
    for r, c in art_col.items():
        t_rows[r][c] = mpq(1)
        basis[r] = c
    tab = _Tableau(t_rows, t_rhs, basis, ncols)
    is_art = [False] * ncols
    for c in art_col.values():
        is_art[c] = True

    if art_col:
        # phase 1: maximize -sum(artificials)
        obj = [mpq(0)] * ncols
        for c in art_col.values():
            obj[c] = mpq(1)
        phase1 = [obj, mpq(0)]
        for r in art_col:
            row = t_rows[r]
            for j in range(ncols):
                if row[j]:
                    obj[j] -= row[j]
            phase1[1] -= t_rhs[r]
        tab.optimize(phase1, [True] * ncols)
        if phase1[1] < 0:
            return "infeasible", None, None
        # drive artificials out of the basis
        r = 0
        while r < len(tab.rows):
            if is_art[tab.basis[r]]:
                row = tab.rows[r]
                c = next((j for j in range(ncols) if not is_art[j] and row[j]), None)
                if c is None:
                    del tab.rows[r]
                    del tab.rhs[r]
                    del tab.basis[r]
                    continue
                tab.pivot(r, c, [[mpq(0)] * ncols, mpq(0)])
            r += 1

    # phase 2
    obj = [mpq(0)] * ncols
    for j in range(nvar):
        cj = objective[j]
        if cj:
            pos, neg = col_of[j]
            obj[pos] = -cj
            if neg is not None:
                obj[neg] = cj
    objective2 = [obj, mpq(0)]
    for r, b in enumerate(tab.basis):
        f = obj[b]
        if f:
            row = tab.rows[r]
            for j in range(ncols):
                if row[j]:
                    obj[j] -= f * row[j]
            objective2[1] -= f * tab.rhs[r]
    allowed = [not a for a in is_art]
    status = tab.optimize(objective2, allowed)
    colval = [mpq(0)] * ncols
    for r, b in enumerate(tab.basis):
        colval[b] = tab.rhs[r]
    x = []
    for j in range(nvar):
        pos, neg = col_of[j]
        v = colval[pos]
        if neg is not None:
            v -= colval[neg]
        x.append(v)
    if status == "unbounded":
        return "unbounded", x, None
    return "optimal", x, objective2[1]


def _to_frac(v) -> Fraction:
    return Fraction(int(v.numerator), int(v.denominator))


def _prepare(constraints: Sequence[LinearConstraint], dim: int):
    """Split out trivial rows and nonnegativity bounds.

    Returns None when a trivial row is violated, otherwise
    ``(rows, rels, rhs, strict_flags, nonneg)`` with rows as mpq lists.
    """
    nonneg = [False] * dim
    kept = []
    for c in constraints:
        if c.dim != dim:
            raise ValueError(f"constraint has {c.dim} coefficients, expected {dim}")
        if c.is_trivial():
            if not c.trivially_true():
                return None
            continue
        if c.rel == LE and c.bound == 0:
            sup = [k for k, a in enumerate(c.coeffs) if a]
            if len(sup) == 1 and c.coeffs[sup[0]] < 0:
                nonneg[sup[0]] = True
                continue
        kept.append(c)
    rows = [[mpq(a.numerator, a.denominator) for a in c.coeffs] for c in kept]
    rels = [EQ if c.rel == EQ else LE for c in kept]
    rhs = [mpq(c.bound.numerator, c.bound.denominator) for c in kept]
    strict = [c.rel == LT for c in kept]
    return rows, rels, rhs, strict, nonneg


def _strict_lp(constraints, dim):
    prep = _prepare(constraints, dim)
    if prep is None:
        return None
    rows, rels, rhs, strict, nonneg = prep
    if not any(strict):
        status, x, _ = _solve_lp(rows, rels, rhs, nonneg, [mpq(0)] * dim)
        return None if status == "infeasible" else x
    # slack variable t in the last column
    rows = [row + [mpq(1) if s else mpq(0)] for row, s in zip(rows, strict)]
    rows.append([mpq(0)] * dim + [mpq(1)])
    rels = rels + [LE]
    rhs = rhs + [mpq(1)]
    objective = [mpq(0)] * dim + [mpq(1)]
    status, x, value = _solve_lp(rows, rels, rhs, nonneg + [True], objective)
    if status != "optimal" or value <= 0:
        return None
    return x[:dim]


def feasible(constraints: Sequence[LinearConstraint], dim: int | None = None) -> bool:
    """Exact feasibility of a conjunction of (possibly strict) linear constraints."""
    if dim is None:
        if not constraints:
            return True
        dim = constraints[0].dim
    return _strict_lp(constraints, dim) is not None


def interior_point(constraints: Sequence[LinearConstraint], dim: int) -> tuple[Fraction, ...] | None:
    """A point satisfying every constraint (strict rows strictly), or None."""
    x = _strict_lp(constraints, dim)
    return None if x is None else tuple(_to_frac(v) for v in x)


def maximize(constraints: Sequence[LinearConstraint], objective: Sequence, dim: int):
    """Maximize over the topological closure.  Returns (status, point, value)."""
    prep = _prepare([c.closure() for c in constraints], dim)
    if prep is None:
        return "infeasible", None, None
    rows, rels, rhs, _, nonneg = prep
    obj = [mpq(_frac(c).numerator, _frac(c).denominator) for c in objective]
    status, x, value = _solve_lp(rows, rels, rhs, nonneg, obj)
    if status == "infeasible":
        return status, None, None
    point = tuple(_to_frac(v) for v in x)
    return status, point, (None if value is None else _to_frac(value))


# --------------------------------------------------------------------------
# Fourier-Motzkin projection


def _combine(pos: LinearConstraint, neg: LinearConstraint, var: int) -> LinearConstraint:
    a = pos.coeffs[var]
    b = -neg.coeffs[var]
    coeffs = tuple(p / a + q / b for p, q in zip(pos.coeffs, neg.coeffs))
    coeffs = coeffs[:var] + (Fraction(0),) + coeffs[var + 1:]
    rel = LT if (pos.strict or neg.strict) else LE
    return LinearConstraint(coeffs, rel, pos.bound / a + neg.bound / b)


def _substitute(eq: LinearConstraint, target: LinearConstraint, var: int) -> LinearConstraint:
    f = target.coeffs[var] / eq.coeffs[var]
    coeffs = tuple(t - f * e for t, e in zip(target.coeffs, eq.coeffs))
    coeffs = coeffs[:var] + (Fraction(0),) + coeffs[var + 1:]
    return LinearConstraint(coeffs, target.rel, target.bound - f * eq.bound)


def _tidy(constraints: Iterable[LinearConstraint]) -> list[LinearConstraint] | None:
    seen = {}
    for c in constraints:
        if c.is_trivial():
            if not c.trivially_true():
                return None
            continue
        c = c.normalized()
        key = (c.coeffs, c.rel)
        prev = seen.get(key)
        if prev is None:
            seen[key] = c
        elif c.rel == EQ:
            if prev.bound != c.bound:
                return None
        elif c.bound < prev.bound or (c.bound == prev.bound and c.strict):
            seen[key] = c
    # a strict row makes a non-strict twin with the same bound redundant
    out = []
    for (coeffs, rel), c in seen.items():
        if rel == LE:
            twin = seen.get((coeffs, LT))
            if twin is not None and twin.bound <= c.bound:
                continue
        if rel == LT:
            twin = seen.get((coeffs, LE))
            if twin is not None and twin.bound < c.bound:
                continue
        out.append(c)
    return out


def eliminate(constraints: Sequence[LinearConstraint], variables: Iterable[int],
              prune_above: int = 16) -> list[LinearConstraint] | None:
    """Project out ``variables`` by Fourier-Motzkin elimination.

    The result lives in the same coordinate space with zero coefficients on the
    eliminated variables.  ``None`` means the projection is empty.
    """
    current = _tidy(constraints)
    if current is None:
        return None
    for var in variables:
        eq = next((c for c in current if c.rel == EQ and c.coeffs[var]), None)
        if eq is not None:
            nxt = [(_substitute(eq, c, var) if c.coeffs[var] else c) for c in current if c is not eq]
        else:
            pos = [c for c in current if c.coeffs[var] > 0]
            neg = [c for c in current if c.coeffs[var] < 0]
            nxt = [c for c in current if not c.coeffs[var]]
            nxt.extend(_combine(p, q, var) for p, q in itertools.product(pos, neg))
        current = _tidy(nxt)
        if current is None:
            return None
        if len(current) > prune_above:
            current = remove_redundant(current)
            if current is None:
                return None
    return current


def remove_redundant(constraints: Sequence[LinearConstraint]) -> list[LinearConstraint] | None:
    """Drop rows implied by the others; None if the system is infeasible."""
    if not constraints:
        return []
    dim = constraints[0].dim
    if not feasible(constraints, dim):
        return None
    kept = list(constraints)
    k = 0
    while k < len(kept):
        c = kept[k]
        others = kept[:k] + kept[k + 1:]
        if c.rel != EQ and not feasible(others + [c.negate()], dim):
            kept = others
            continue
        k += 1
    return kept


# --------------------------------------------------------------------------
# polytopes


@dataclass(frozen=True)
class Polytope:
    """Conjunction of linear constraints over ``dim`` variables (H-representation)."""

    dim: int
    constraints: tuple[LinearConstraint, ...] = ()

    def __post_init__(self):
        for c in self.constraints:
            if c.dim != self.dim:
                raise ValueError(f"constraint dimension {c.dim} != polytope dimension {self.dim}")

    @classmethod
    def from_constraints(cls, dim: int, constraints: Iterable[LinearConstraint]) -> "Polytope":
        return cls(dim, tuple(constraints))

    @cached_property
    def _witness(self):
        return interior_point(self.constraints, self.dim)

    def feasible(self) -> bool:
        return self._witness is not None

    def is_empty(self) -> bool:
        return self._witness is None

    def witness(self) -> tuple[Fraction, ...] | None:
        return self._witness

    def contains(self, point: Sequence) -> bool:
        return all(c.holds(point) for c in self.constraints)

    def intersect(self, other: "Polytope | Iterable[LinearConstraint]") -> "Polytope":
        extra = other.constraints if isinstance(other, Polytope) else tuple(other)
        return Polytope(self.dim, self.constraints + tuple(extra))

    def implies(self, c: LinearConstraint) -> bool:
        """True when every point of this polytope satisfies ``c``."""
        if c.rel == EQ:
            return self.implies(LinearConstraint(c.coeffs, LE, c.bound)) and self.implies(
                LinearConstraint(tuple(-a for a in c.coeffs), LE, -c.bound))
        return not feasible(self.constraints + (c.negate(),), self.dim)

    def issubset(self, other: "Polytope") -> bool:
        if self.is_empty():
            return True
        return all(self.implies(c) for c in other.constraints)

    def set_equal(self, other: "Polytope") -> bool:
        return self.issubset(other) and other.issubset(self)

    def subtract(self, other: "Polytope") -> list["Polytope"]:
        """Pairwise-disjoint pieces covering ``self`` minus ``other``."""
        if self.is_empty():
            return []
        if self.intersect(other).is_empty():
            return [self]
        pieces = []
        acc = self
        for c in other.constraints:
            if acc.implies(c):
                continue
            negs = [c.negate()] if c.rel != EQ else [
                LinearConstraint(c.coeffs, LE, c.bound).negate(),
                LinearConstraint(tuple(-a for a in c.coeffs), LE, -c.bound).negate(),
            ]
            for neg in negs:
                piece = acc.intersect([neg])
                if piece.feasible():
                    pieces.append(piece)
            acc = acc.intersect([c])
        return pieces

    def minimized(self) -> "Polytope":
        kept = remove_redundant(list(self.constraints))
        if kept is None:
            return self
        return Polytope(self.dim, tuple(kept))

    def format(self, names: Sequence[str] | None = None) -> list[str]:
        return [c.format(names) for c in self.constraints]


def covered_by(piece: Polytope, union: Iterable[Polytope]) -> bool:
    """Exact test of ``piece`` being a subset of the union of ``union``."""
    remaining = [piece] if piece.feasible() else []
    for q in union:
        if not remaining:
            break
        nxt = []
        for p in remaining:
            nxt.extend(p.subtract(q))
        remaining = nxt
    return not remaining


def union_difference(pieces: Iterable[Polytope], union: Iterable[Polytope]) -> list[Polytope]:
    remaining = [p for p in pieces if p.feasible()]
    for q in union:
        nxt = []
        for p in remaining:
            nxt.extend(p.subtract(q))
        remaining = nxt
    return remaining
