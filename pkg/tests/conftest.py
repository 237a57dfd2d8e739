import sys

import pytest

from bergman_calculus.expansion import compute_u


@pytest.fixture(scope="session")
def charge0_report():
    return compute_u(3, cutoff=-7, qin=0, qout=2)


@pytest.fixture(scope="session")
def charge_minus2_report():
    return compute_u(2, cutoff=-7, qin=0, qout=2)


def pytest_terminal_summary(terminalreporter):
    lines = [ln for m in list(sys.modules.values())
             for ln in getattr(m, "ACCEPTANCE_LINES", None) or []]
    if lines:
        terminalreporter.section("acceptance criteria")
        for ln in sorted(lines):
            terminalreporter.write_line(ln)
