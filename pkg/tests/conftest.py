import json
from pathlib import Path

import pytest
from hypothesis import settings

from inertia_scope.grid_model import load_case

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

ORACLES = Path(__file__).resolve().parent / "oracles"

_results = pytest.StashKey[dict]()


@pytest.fixture(scope="session")
def frozen():
    return json.loads((ORACLES / "frozen.json").read_text())


@pytest.fixture(scope="session")
def ieee24():
    return load_case("ieee24")


@pytest.fixture(scope="session")
def three_bus():
    return load_case(ORACLES / "three_bus.json")


@pytest.fixture
def accept(request):
    """Record one acceptance criterion's outcome, then assert it."""
    store = request.config.stash.setdefault(_results, {})

    def check(n: int, title: str, ok: bool, detail: str = ""):
        store[n] = (title, bool(ok), detail)
        assert ok, f"criterion {n} ({title}) failed: {detail}"

    return check


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash.get(_results, None)
    if not store:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(store):
        title, ok, detail = store[n]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {n:2d}. {title}: {detail}")
