import pytest

from flwlab.syntax import parse_formula, parse_sequent, parse_theory


@pytest.fixture
def F():
    return parse_formula


@pytest.fixture
def S():
    return parse_sequent


@pytest.fixture
def T():
    return parse_theory


_ACCEPTANCE = []


@pytest.fixture
def criterion():
    """Record a PASS/FAIL line for an acceptance criterion, then assert it."""

    def record(number: int, ok: bool, detail: str):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)
