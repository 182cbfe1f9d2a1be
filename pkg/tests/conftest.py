import math

import pytest
from hypothesis import settings

from rotrad.quadrature import QuadratureConfig
from rotrad.response import Lorentz, ParticleResponse, PowerLaw

settings.register_profile("rotrad", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("rotrad")


@pytest.fixture(scope="session")
def lorentz():
    return ParticleResponse(Lorentz(1e-21, 2e13, 1e13))


@pytest.fixture(scope="session")
def ohmic():
    return ParticleResponse(PowerLaw(1e-35, 1))


@pytest.fixture(scope="session")
def qcfg():
    return QuadratureConfig()


PI4 = math.pi / 4
