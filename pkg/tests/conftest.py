import pytest

from brst_reduction.config import Settings
from brst_reduction.ring import get_ring
from brst_reduction.scenario import build_scenario


@pytest.fixture
def ring0():
    return get_ring(0)


@pytest.fixture
def ring1():
    return get_ring(1)


@pytest.fixture(scope="session")
def settings():
    return Settings(degree_bound=8, nu_order=4, normalizer_degree_bound=4, equivalence_degree_bound=4)


@pytest.fixture(scope="session")
def scenario0(settings):
    return build_scenario(0, settings)


@pytest.fixture(scope="session")
def scenario1(settings):
    return build_scenario(1, settings)
