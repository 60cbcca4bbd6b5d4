import numpy as np
import pytest

from bandtop.analysis import slice_profile, track_default_deformation
from bandtop.degeneracy import find_degeneracies
from bandtop.localmodel import classify_point
from bandtop.models import make_diamond, make_gyroid, make_honeycomb

PI = np.pi

# Gyroid points in the order returned by find_degeneracies
GYROID_POINTS = {
    "origin": (0.0, 0.0, 0.0),
    "half": (PI / 2,) * 3,
    "pi": (PI,) * 3,
    "three_half": (3 * PI / 2,) * 3,
}

ACCEPTANCE_LINES: list = []


@pytest.fixture(scope="session")
def gyroid():
    return make_gyroid()


@pytest.fixture(scope="session")
def gyroid_scan(gyroid):
    return find_degeneracies(gyroid)


@pytest.fixture(scope="session")
def gyroid_models(gyroid, gyroid_scan):
    return [classify_point(gyroid, p, others=gyroid_scan.points) for p in gyroid_scan.points]


@pytest.fixture(scope="session")
def gyroid_profiles(gyroid, gyroid_scan):
    return [slice_profile(gyroid, ax, gyroid_scan) for ax in range(3)]


@pytest.fixture(scope="session")
def honeycomb():
    return make_honeycomb()


@pytest.fixture(scope="session")
def honeycomb_scan(honeycomb):
    return find_degeneracies(honeycomb)


@pytest.fixture(scope="session")
def diamond():
    return make_diamond()


@pytest.fixture(scope="session")
def diamond_scan(diamond):
    return find_degeneracies(diamond)


@pytest.fixture(scope="session")
def deformation_trace(gyroid, gyroid_scan):
    return track_default_deformation(gyroid, (0.0, 0.005, 0.01), base_scan=gyroid_scan)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
