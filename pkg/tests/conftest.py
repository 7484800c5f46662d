import pytest

from utils.screwfn import ScrewContext
from utils.screwline import ScrewLineContext
from utils.zeros import embedded_zeros, height_for_count, locate_zeros


@pytest.fixture(scope="session")
def table():
    return embedded_zeros()


@pytest.fixture(scope="session")
def screw():
    return ScrewContext(t_max=8.0)


@pytest.fixture(scope="session")
def line(screw):
    return ScrewLineContext(screw)


@pytest.fixture(scope="session")
def located_2000():
    return locate_zeros(height_for_count(2000) + 5.0)
