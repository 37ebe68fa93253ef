import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)


def random_payloads(rng, n, width=52):
    return rng.integers(0, 2, (n, width), dtype=np.uint8)


@pytest.fixture
def verdict(request):
    """Record one acceptance line; the summary hook prints them all."""
    store = request.config.__dict__.setdefault("_acceptance_lines", [])

    def record(label: str, ok: bool, detail: str = "") -> None:
        line = f"{'PASS' if ok else 'FAIL'}  {label}" + (f"  [{detail}]" if detail else "")
        store.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.__dict__.get("_acceptance_lines")
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
