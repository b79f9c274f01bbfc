import json

import pytest

from modebeam.core.geometry import BendSpec, build_antenna1, build_antenna2
from modebeam.core.numerics import make_sphere_grid


@pytest.fixture(scope="session")
def antenna1():
    return build_antenna1()


@pytest.fixture(scope="session")
def antenna2():
    return build_antenna2()


@pytest.fixture(scope="session")
def antenna1_equal_power():
    return build_antenna1("equal_power")


@pytest.fixture(scope="session")
def grid():
    return make_sphere_grid(64, 128)


@pytest.fixture(scope="session")
def x_bend():
    return BendSpec(axis="x", radius=10.0)


@pytest.fixture(scope="session")
def y_bend():
    return BendSpec(axis="y", radius=10.0)


@pytest.fixture
def write_scenario(tmp_path):
    """Write a scenario document and return its path."""

    def _write(data, name="scenario.json"):
        path = tmp_path / name
        path.write_text(data if isinstance(data, str) else json.dumps(data, indent=2))
        return path

    return _write
