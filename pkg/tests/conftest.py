from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from inpipe import fixture_path
from inpipe.mission import parse_mission
from inpipe.sewer import parse_kis


@pytest.fixture(scope="session")
def kis_text() -> str:
    return fixture_path("ais_test_env.kis").read_text()


@pytest.fixture(scope="session")
def world(kis_text):
    return parse_kis(kis_text)


@pytest.fixture(scope="session")
def fig4_mission_text() -> str:
    return fixture_path("fig4_mission.json").read_text()


@pytest.fixture(scope="session")
def fig4_mission(world, fig4_mission_text):
    return parse_mission(fig4_mission_text, world)


@pytest.fixture(scope="session")
def fig4_plan_text() -> str:
    return fixture_path("fig4_plan.txt").read_text()


def scenario_path(name: str) -> Path:
    return Path(str(fixture_path(f"scenarios/{name}.json")))
