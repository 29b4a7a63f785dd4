import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from axiflow.flow import FlowConfig, run  # noqa: E402
from axiflow.scenarios import cylinder, neck, perturbed_cylinder  # noqa: E402


@pytest.fixture(scope="session")
def neck_mcf():
    """The neck-pinch mean curvature run shared by several modules."""
    return run(neck(), FlowConfig("mcf", t_end=0.5, snapshot_every=500))


@pytest.fixture(scope="session")
def cylinder_mcf():
    return run(cylinder(n_cells=64), FlowConfig("mcf", t_end=0.4, snapshot_every=200))


@pytest.fixture(scope="session")
def perturbed_volume():
    return run(perturbed_cylinder(n_cells=64), FlowConfig("volume", t_end=0.2, snapshot_every=200))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
