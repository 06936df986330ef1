import pytest

from cavity_eo.model import SystemParams


@pytest.fixture
def fig3_point():
    return SystemParams(kappa=2, gamma=2, gamma_p=2, delta=9)


@pytest.fixture
def blocking_point():
    return SystemParams(kappa=1, gamma=0, gamma_p=2, delta=0)
