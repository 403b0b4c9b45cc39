import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from qcdse.merit import Scenario  # noqa: E402

ION_TRAP_QF = 0.2 / 5.4e-7


@pytest.fixture
def ion_trap_scenario():
    return Scenario(fidelity=0.999, quality_factor=ION_TRAP_QF, eps_i=1e-4, eps_c=0.05,
                    n_q_lim=1000, n_q_norm=10**6)


_criteria = []


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _criteria.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _criteria:
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
