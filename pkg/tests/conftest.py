import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from txplace.grid import BuildingMap, generate_building_map  # noqa: E402
from txplace.oracle import label_map  # noqa: E402

DESK_SIZE = 32
DESK_MARGIN = 8
DESK_COUNT = 50


def desk_maps(count=DESK_COUNT):
    return [
        generate_building_map([1, i], DESK_SIZE, DESK_SIZE, 0.25, (2, 6), id=f"m{i:05d}")
        for i in range(count)
    ]


@pytest.fixture(scope="session")
def desk_corpus():
    """50 labeled 32x32 maps under the wall-count model."""
    return [label_map(b, DESK_MARGIN) for b in desk_maps()]


@pytest.fixture(scope="session")
def small_corpus(desk_corpus):
    return desk_corpus[:12]


@pytest.fixture
def free8():
    return BuildingMap.free(8, 8, id="free8")


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py" in nodeid and getattr(rep, "when", "call") == "call":
                lines.append((nodeid.split("::")[-1], "PASS" if outcome == "passed" else "FAIL"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for name, status in sorted(lines):
            terminalreporter.write_line(f"{status}  {name}")
