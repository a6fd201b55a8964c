import numpy as np
import pytest

from ecsdbn.numerics import RngStream

_ACCEPTANCE = []


@pytest.fixture
def rng():
    return RngStream(12345)


@pytest.fixture
def np_rng():
    return np.random.default_rng(2024)


@pytest.fixture
def acceptance_report():
    """Record one pass/fail line per acceptance criterion."""

    def report(name, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] {name}" + (f": {detail}" if detail else "")
        _ACCEPTANCE.append(line)
        print(line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
