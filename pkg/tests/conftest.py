from __future__ import annotations

from pathlib import Path

import pytest

from privacycube.profiles import load_profile_dir

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def profile_dir() -> Path:
    return FIXTURES / "profiles"


@pytest.fixture(scope="session")
def scenario_dir() -> Path:
    return FIXTURES / "scenarios"


@pytest.fixture()
def fixture_registry(profile_dir):
    return load_profile_dir(profile_dir)
