from __future__ import annotations

from functools import lru_cache

import pytest

from semiquant.classical import ClassicalData
from semiquant.oracle import is_zero
from semiquant.parser import parse
from semiquant.quantum import QuantumData

# (E, G, ω scale) triples covering every family plus generic metrics
CORPUS = (
    ("y^-2", "c^2*y^-2", "c"),
    ("y^-2", "y^-2*exp(2*t/y)", "1"),
    ("1", "1", "1"),
    ("2", "y^3+1", "1"),
    ("y^-1", "y^2+1", "1"),
    ("y^-2", "y^-4", "1"),
    ("exp(y)", "y", "1"),
    ("y^2+1", "3*y^2+3", "1"),
    ("(y+2*c1)^-2", "A*(y+2*c1)^-2", "1"),
    ("y", "y^-1+y", "1"),
)


@lru_cache(maxsize=None)
def pipeline(E: str, G: str, scale: str = "1") -> tuple[ClassicalData, QuantumData]:
    cd = ClassicalData.compute(parse(E), parse(G), parse(scale))
    return cd, QuantumData.compute(cd)


def zero(e) -> bool:
    return is_zero(e).is_zero


def all_zero(graded) -> bool:
    return all(zero(c) for c in graded.components())


def same(a, b) -> bool:
    if isinstance(b, str):
        b = parse(b)
    return zero(a - b)


@pytest.fixture
def upper():
    return pipeline("y^-2", "c^2*y^-2", "c")


@pytest.fixture
def deformed():
    return pipeline("y^-2", "y^-2*exp(2*t/y)")


@pytest.fixture
def flat():
    return pipeline("1", "1")


def pytest_terminal_summary(terminalreporter):
    lines = [
        value
        for outcome in ("passed", "failed")
        for rep in terminalreporter.stats.get(outcome, [])
        if rep.when == "call"
        for key, value in rep.user_properties
        if key == "acceptance"
    ]
    if lines:
        terminalreporter.section("acceptance")
        for line in sorted(lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
