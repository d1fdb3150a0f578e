import pytest

from guaranteesim import calibrate_conditioning, load_scenario


@pytest.fixture(scope="session")
def calibration():
    # production grids; shared because the sweep costs a second or two
    return calibrate_conditioning()


@pytest.fixture(scope="session")
def default_scenario():
    return load_scenario(None)
