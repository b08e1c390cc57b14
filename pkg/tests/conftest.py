import json

import pytest

from npdshare import GameSpec, LinearGain


@pytest.fixture
def spec2():
    """Two firms, linear gain G=3, loss 1, the standard kernel (0.9, 0.1)."""
    return GameSpec(2, LinearGain(3.0), 1.0, 0.9, 0.1, 0.9)


@pytest.fixture
def spec2_patient():
    return GameSpec(2, LinearGain(3.0), 1.0, 0.9, 0.1, 0.99)


@pytest.fixture
def spec3():
    return GameSpec(3, LinearGain(3.0), 1.0, 0.9, 0.1, 0.9)


@pytest.fixture
def spec_file(tmp_path):
    """Write a spec dict to a JSON file and return the path."""

    def write(obj, name="spec.json"):
        path = tmp_path / name
        path.write_text(json.dumps(obj))
        return str(path)

    return write


@pytest.fixture
def spec2_file(spec_file):
    return spec_file(
        {
            "n_firms": 2,
            "gain": {"kind": "linear", "G": 3.0},
            "L": 1.0,
            "alpha": 0.9,
            "epsilon": 0.1,
            "delta": 0.9,
        }
    )


@pytest.fixture
def spec3_file(spec_file):
    return spec_file(
        {
            "n_firms": 3,
            "gain": {"kind": "linear", "G": 3.0},
            "L": 1.0,
            "alpha": 0.9,
            "epsilon": 0.1,
            "delta": 0.9,
        },
        name="spec3.json",
    )
