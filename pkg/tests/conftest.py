from __future__ import annotations

from pathlib import Path

import pytest

from powergame.exact.kernel import LinearConstraint, Polytope
from powergame.scenario import parse_scenario

ROOT = Path(__file__).resolve().parent.parent
SCENARIOS = ROOT / "scenarios"

# PASS/FAIL lines collected by test_acceptance, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def load(name: str):
    return parse_scenario((SCENARIOS / name).read_text())


@pytest.fixture(scope="session")
def chain():
    """The three-country adversary chain with its printed orders."""
    return load("example3.scn")


@pytest.fixture(scope="session")
def case1():
    return load("case1.scn")


@pytest.fixture(scope="session")
def case2():
    return load("case2.scn")


def ge(coeffs, bound):
    return LinearConstraint.geq(coeffs, bound)


def le(coeffs, bound):
    return LinearConstraint.make(coeffs, "<=", bound)


def chain_class_a() -> Polytope:
    """{4<=a<=5, 9-a<=d<=5, 0<=b<=4, 5<=c<=9-b} over (a, b, c, d)."""
    return Polytope(4, (
        ge([1, 0, 0, 0], 4), ge([1, 0, 0, 1], 9), le([1, 0, 0, 0], 5), le([0, 1, 0, 0], 4),
        le([0, 0, 0, 1], 5), ge([0, 1, 0, 0], 0), ge([0, 0, 1, 0], 5), le([0, 1, 1, 0], 9),
    ))


def chain_class_b() -> Polytope:
    """{4<=a<=5, 9-a<=d<=5, b<=9, c<=9-b, 0<=c, 5<=b}."""
    return Polytope(4, (
        ge([1, 0, 0, 0], 4), ge([1, 0, 0, 1], 9), le([1, 0, 0, 0], 5), le([0, 1, 0, 0], 9),
        le([0, 1, 1, 0], 9), ge([0, 0, 1, 0], 0), ge([0, 1, 0, 0], 5), le([0, 0, 0, 1], 5),
    ))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
