import os

import pytest

FIXTURES = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "fixtures")

# criterion id -> (status, detail), filled by tests/test_acceptance.py
ACCEPTANCE: dict[str, tuple[str, str]] = {}


@pytest.fixture
def record():
    def _record(criterion: str, passed: bool, detail: str = "") -> bool:
        ACCEPTANCE[criterion] = ("PASS" if passed else "FAIL", detail)
        return passed

    return _record


@pytest.fixture
def fixtures_dir():
    return FIXTURES


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(ACCEPTANCE, key=lambda c: (int(c.split(".")[0]), c)):
        status, detail = ACCEPTANCE[criterion]
        terminalreporter.write_line(f"{status} criterion {criterion}: {detail}")
