import pytest

from wva_sensor.design import paper_config

_ACCEPTANCE_LINES = []


@pytest.fixture
def paper_cfg():
    """lambda0 = 840 nm, W = 150 nm, NL = 500 m, beta = 0.001."""
    return paper_config(0.001)


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion, then assert it."""

    def check(label, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] {label}" + (f" :: {detail}" if detail else "")
        _ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return check


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
