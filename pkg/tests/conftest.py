import sys

import pytest

from ecdensity import families as fm


@pytest.fixture(scope="session")
def f1_prime():
    return fm.prime_family("F1")


@pytest.fixture(scope="session")
def f2_prime():
    return fm.prime_family("F2")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(lines):
        terminalreporter.write_line(lines[n])
