from pathlib import Path

import pytest

from gridcut.grid import ANGLE, FLOW, GridTopology, Line, MeasurementSet, load_scenario

FIXTURES = Path(__file__).parent / "fixtures"

_acceptance_lines: list[str] = []


def record_criterion(number: int, title: str, passed: bool, detail: str = "") -> None:
    """Log one acceptance line; the summary is printed at the end of the run."""
    status = "PASS" if passed else "FAIL"
    _acceptance_lines.append(f"[{status}] criterion {number}: {title}" + (f" ({detail})" if detail else ""))


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


def make_ms(topo, flows=(), angles=(), protected=(), states=()):
    """Flow meters on the given (i, j) pairs, then angle meters, in order."""
    ms = MeasurementSet()
    for i, j in flows:
        ms = ms.append(FLOW, topo.find_line(i, j))
    for b in angles:
        ms = ms.append(ANGLE, b)
    ms = ms.protect(protected)
    return MeasurementSet(ms.measurements, frozenset(states))


@pytest.fixture
def chain():
    return GridTopology(3, (Line(1, 2, 1.0), Line(2, 3, 1.0)))


@pytest.fixture
def chain_ms(chain):
    # ids: 0 = flow(1,2), 1 = flow(2,3), 2 = angle(1)
    return make_ms(chain, flows=[(1, 2), (2, 3)], angles=[1])


@pytest.fixture
def star():
    # centre 1, leaves 2..5
    return GridTopology(5, tuple(Line(1, leaf, 1.0) for leaf in range(2, 6)))


@pytest.fixture
def star_ms(star):
    return make_ms(star, flows=[(1, leaf) for leaf in range(2, 6)], angles=[1])


@pytest.fixture
def cycle4():
    return GridTopology(4, (Line(1, 2, 1.0), Line(2, 3, 1.0), Line(3, 4, 1.0), Line(4, 1, 1.0)))


@pytest.fixture
def cycle4_ms(cycle4):
    return make_ms(cycle4, flows=[(1, 2), (2, 3), (3, 4), (4, 1)], angles=[1])


def fixture_scenario(name):
    return load_scenario(FIXTURES / f"{name}.json")


CASE14_FIXTURES = ("case14_open", "case14_sixth", "case14_third")
