"""Shared fixtures plus the one-line-per-criterion acceptance report."""

import pytest

from sc2 import fixtures as fx


def pytest_configure(config):
    config.acceptance_lines = {}


@pytest.fixture
def report(request):
    """``report(n, ok, detail)`` records the outcome line of acceptance criterion ``n``."""
    lines = request.config.acceptance_lines

    def record(n, ok, detail):
        lines[n] = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "acceptance_lines", {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])


@pytest.fixture(scope="session")
def torus():
    return fx.torus()


@pytest.fixture(scope="session")
def rp2():
    return fx.rp2_6()


@pytest.fixture(scope="session")
def wedge():
    return fx.wedge_rp2_s1()


@pytest.fixture(scope="session")
def disk():
    return fx.disk()


