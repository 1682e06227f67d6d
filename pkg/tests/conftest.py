import pytest
from hypothesis import HealthCheck, settings

from pdgsem.ir import parse_cfg

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def prog(text: str):
    """Parse a program given with ';' or newlines between lines."""
    return parse_cfg(text.replace(";", "\n"))


@pytest.fixture
def two_node():
    return prog("node 1: x := 1; node 2: ret x; edge 1 -> 2")


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
