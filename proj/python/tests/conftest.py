import os
import pathlib

import pytest

ROOT = pathlib.Path(__file__).resolve().parents[2]


@pytest.fixture(scope="session")
def configs():
    return pathlib.Path(os.environ.get("HEADROOM_CONFIGS", ROOT / "configs"))


@pytest.fixture(scope="session")
def test_data():
    return ROOT / "tests" / "data"
