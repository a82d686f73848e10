import pytest

from skewprod.dynamics import SkewSystem
from skewprod.fiber import arctan_model, mobius_model, pld_model


@pytest.fixture(scope="session")
def pld():
    return pld_model()


@pytest.fixture(scope="session")
def mobius():
    return mobius_model(2.0)


@pytest.fixture(scope="session")
def arctan():
    return arctan_model()


@pytest.fixture(scope="session")
def pld_sys(pld):
    return SkewSystem(pld)


@pytest.fixture(scope="session")
def mobius_sys(mobius):
    return SkewSystem(mobius)
