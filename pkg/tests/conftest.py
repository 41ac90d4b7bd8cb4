from functools import lru_cache

import pytest

from clockdimer.experiments import calibrate_gate
from clockdimer.model import cr7mn_heterodimer
from clockdimer.spectrum import extract_effective_model


@lru_cache(maxsize=None)
def effective(jzz_mhz: float = 50.0, j_perp: float = 0.1):
    return extract_effective_model(cr7mn_heterodimer(J_perp=j_perp, J_zz=jzz_mhz * 1e-3))


@lru_cache(maxsize=None)
def calibrated(gate: str, jzz_mhz: float = 50.0):
    return calibrate_gate(effective(jzz_mhz), gate)


@pytest.fixture(scope="session")
def em50():
    return effective(50.0)


@pytest.fixture(scope="session")
def em_uncoupled():
    return effective(0.0, 0.0)


@pytest.fixture(scope="session")
def cnot50():
    return calibrated("CNOT", 50.0)
