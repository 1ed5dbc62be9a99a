import json

import pytest

from support import fixture_a


@pytest.fixture
def fixa():
    """Canonical three-outcome fixture: (space, distortion, liability)."""
    return fixture_a()


@pytest.fixture
def fixa_file(tmp_path):
    """The canonical fixture written as a portfolio file."""
    record = {
        "probabilities": [0.5, 0.3, 0.2],
        "k0": 1.0,
        "agents": [
            {"name": "mill", "losses": [0, 2, 2]},
            {"name": "haulage", "losses": [0, 0, 3]},
        ],
        "distortion": {"kind": "power", "gamma": 0.5},
    }
    path = tmp_path / "fixture_a.json"
    path.write_text(json.dumps(record))
    return path
