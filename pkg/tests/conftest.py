import numpy as np
import pytest

from fracboundary.domains import Lattice
from fracboundary.kernel import KernelSpec, build_weight_table


@pytest.fixture(scope="session")
def lat64():
    return Lattice(1, (-2.0,), 4.0, 64)


@pytest.fixture(scope="session")
def lat256():
    return Lattice(1, (-2.0,), 4.0, 256)


@pytest.fixture(scope="session")
def table64(lat64):
    return build_weight_table(KernelSpec(s=0.4, p=2.0, dim=1), lat64)


@pytest.fixture(scope="session")
def table256(lat256):
    return build_weight_table(KernelSpec(s=0.4, p=2.0, dim=1), lat256)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
