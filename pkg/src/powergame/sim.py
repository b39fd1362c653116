"""Sampled best-response update processes and the likelihood report built from them.

Each process starts from a uniformly sampled strategy matrix and lets
countries replace their row with an exact best response against the others.
Randomness comes only from the initial matrix, drawn from a per-process stream derived from ``(seed, h)``, so the
results do not depend on how processes are scheduled across workers.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .model import EnvironmentGraph, State, StrategyMatrix, format_states, state_vector
from .preferences import Preferences
from .response import best_response, current_reduced, is_equilibrium

ASYNC = "async"
SYNC = "sync"
LATTICE = 10 ** 6
DEFAULT_ROUNDS = 50


@dataclass(frozen=True)
class SimConfig:
    q: int = 1000
    rounds: int = DEFAULT_ROUNDS
    mode: str = ASYNC
    seed: int = 0
    workers: int = 1
    lattice: int = LATTICE

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("q must be at least 1")
        if self.rounds < 1:
            raise ValueError("rounds must be at least 1")
        if self.mode not in (ASYNC, SYNC):
            raise ValueError(f"unknown update mode {self.mode!r}")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        if self.lattice < 1:
            raise ValueError("lattice must be at least 1")


@dataclass(frozen=True)
class ProcessResult:
    h: int
    terminal: StrategyMatrix
    converged: bool
    rounds: int
    states: tuple[State, ...]

    @property
    def label(self) -> str:
        return format_states(self.states)


def _stream(seed: int, h: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, h]))


def _lattice_row(rng: np.random.Generator, k: int, lattice: int) -> list[int]:
    """Uniform composition of ``lattice`` into ``k`` nonnegative parts (stars and bars)."""
    if k == 1:
        return [lattice]
    bars = np.sort(rng.choice(lattice + k - 1, size=k - 1, replace=False))
    edges = np.concatenate(([-1], bars, [lattice + k - 1]))
    return [int(v) for v in np.diff(edges) - 1]


def sample_matrix(g: EnvironmentGraph, rng: np.random.Generator, lattice: int = LATTICE) -> StrategyMatrix:
    rows = []
    for i in range(g.n):
        support = sorted((i,) + g.neighbors(i))
        parts = _lattice_row(rng, len(support), lattice)
        row = [Fraction(0)] * g.n
        for j, part in zip(support, parts):
            row[j] = g.power[i] * Fraction(part, lattice)
        rows.append(tuple(row))
    return StrategyMatrix(tuple(rows))


def sample_initial(g: EnvironmentGraph, q: int, seed: int, lattice: int = LATTICE) -> list[StrategyMatrix]:
    """``q`` matrices with each row uniform on the scaled simplex over its support."""
    if q < 1:
        raise ValueError("q must be at least 1")
    return [sample_matrix(g, _stream(seed, h), lattice) for h in range(q)]


def run_process(g: EnvironmentGraph, prefs: Preferences, U0: StrategyMatrix, config: SimConfig,
                h: int = 0) -> ProcessResult:
    """Myopic update process from ``U0``.

    Every move replaces the mover's row with its canonical best response, so
    leftover over-allocation is shed even when it costs nothing.  The process
    stops after a round in which nobody's score strictly improved and the
    matrix is a fixed point of the no-improvement test.
    """
    U = U0
    used = 0
    converged = False
    for _ in range(config.rounds):
        used += 1
        if config.mode == ASYNC:
            gained = False
            for i in range(g.n):
                dev = best_response(g, prefs, U, i)
                gained |= dev.score > prefs.score(i, current_reduced(g, U, i))
                U = dev.apply(U)
        else:
            moves = [best_response(g, prefs, U, i) for i in range(g.n)]
            gained = any(m.score > prefs.score(m.country, current_reduced(g, U, m.country)) for m in moves)
            for m in moves:
                U = m.apply(U)
        if not gained and is_equilibrium(g, prefs, U):
            converged = True
            break
    if not converged:
        converged = is_equilibrium(g, prefs, U)
    return ProcessResult(h, U, converged, used, state_vector(g, U))


def _run_chunk(args):
    g, prefs, config, hs = args
    return [run_process(g, prefs, sample_matrix(g, _stream(config.seed, h), config.lattice), config, h)
            for h in hs]


def default_workers() -> int:
    """Worker count from ``POWERGAME_WORKERS``, else 1."""
    value = os.environ.get("POWERGAME_WORKERS")
    return max(1, int(value)) if value else 1


def run_all(g: EnvironmentGraph, prefs: Preferences, config: SimConfig) -> list[ProcessResult]:
    """All ``q`` processes, ordered by ``h``; identical for any worker count."""
    hs = list(range(config.q))
    if config.workers == 1:
        return _run_chunk((g, prefs, config, hs))
    size = max(1, -(-config.q // (config.workers * 4)))
    chunks = [hs[k:k + size] for k in range(0, config.q, size)]
    out = []
    with ProcessPoolExecutor(max_workers=config.workers) as pool:
        for part in pool.map(_run_chunk, [(g, prefs, config, c) for c in chunks]):
            out.extend(part)
    return out


@dataclass(frozen=True)
class LikelihoodView:
    total: int
    class_counts: tuple[tuple[str, int], ...]
    survival_counts: tuple[int, ...]
    safe_counts: tuple[int, ...]

    def _ratio(self, k: int) -> float:
        return k / self.total if self.total else 0.0

    @property
    def shares(self) -> dict[str, float]:
        return {label: self._ratio(c) for label, c in self.class_counts}

    @property
    def survival(self) -> tuple[float, ...]:
        return tuple(self._ratio(c) for c in self.survival_counts)

    @property
    def safe(self) -> tuple[float, ...]:
        return tuple(self._ratio(c) for c in self.safe_counts)


@dataclass(frozen=True)
class LikelihoodReport:
    """Class shares and per-country survival over all results and over converged ones."""

    n: int
    all: LikelihoodView
    converged: LikelihoodView
    rounds_histogram: tuple[tuple[int, int], ...] = field(default=())


def _view(n: int, states: Sequence[tuple[State, ...]]) -> LikelihoodView:
    counts: dict[str, int] = {}
    surv = [0] * n
    safe = [0] * n
    for x in states:
        label = format_states(x)
        counts[label] = counts.get(label, 0) + 1
        for i, s in enumerate(x):
            surv[i] += s.survives
            safe[i] += s is State.SAFE
    ordered = tuple(sorted(counts.items(), key=lambda t: (-t[1], t[0])))
    return LikelihoodView(len(states), ordered, tuple(surv), tuple(safe))


def partition_report(results: Sequence[ProcessResult]) -> LikelihoodReport:
    """Group terminal matrices by state vector and tally the likelihoods."""
    if not results:
        raise ValueError("no results to partition")
    n = len(results[0].states)
    hist: dict[int, int] = {}
    for r in results:
        hist[r.rounds] = hist.get(r.rounds, 0) + 1
    return LikelihoodReport(
        n,
        _view(n, [r.states for r in results]),
        _view(n, [r.states for r in results if r.converged]),
        tuple(sorted(hist.items())),
    )
