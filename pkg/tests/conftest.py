from __future__ import annotations

import pytest

from stockflow.scenario_io import default_scenario


@pytest.fixture(scope="session")
def defaults():
    """The shipped default scenario (immutable; share freely)."""
    return default_scenario()
