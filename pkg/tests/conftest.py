import functools

import pytest

from upb_locc.builders import build_protocol
from upb_locc.locc import run_protocol

ACCEPTANCE_LINES: list[str] = []


@functools.lru_cache(maxsize=None)
def protocol(theorem: int, d: int | None = None):
    return build_protocol(theorem, d)


@functools.lru_cache(maxsize=None)
def report(theorem: int, d: int | None = None):
    p, r, u = protocol(theorem, d)
    return run_protocol(u, p, r)


ALL_PROTOCOLS = [(1, None), (2, None)] + [(t, d) for t in (3, 4) for d in (3, 5, 7, 9)] + [(5, d) for d in (4, 6, 8)]
SMALL_PROTOCOLS = [(1, None), (2, None), (3, 3), (3, 5), (3, 7), (4, 3), (4, 5), (4, 7), (5, 4), (5, 6)]


@pytest.fixture
def get_protocol():
    return protocol


@pytest.fixture
def get_report():
    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
