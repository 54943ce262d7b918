import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dufsim import GraphConfig, build_decoding_graph  # noqa: E402


@pytest.fixture(scope="session")
def graphs():
    cache = {}

    def get(d, rounds=None):
        key = (d, rounds)
        if key not in cache:
            cache[key] = build_decoding_graph(GraphConfig(d, rounds))
        return cache[key]

    return get


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict():
    """Record and print one PASS/FAIL line for an acceptance criterion."""

    def record(name, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} {name}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
