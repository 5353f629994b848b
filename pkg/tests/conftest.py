"""Shared fixtures."""
import numpy as np
import pytest

from qrnn import load_config
from qrnn.models import QrnnArchitecture, QrnnParameters
from qrnn.models.density import set_invariant_checks
from qrnn.services.experiment_service import sample_hamiltonian_coefficients


def pytest_addoption(parser):
    parser.addoption('--runslow', action='store_true', default=False, help='run long reproductions')


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: long-running reproduction (needs --runslow)')


def pytest_collection_modifyitems(config, items):
    if config.getoption('--runslow'):
        return
    skip_slow = pytest.mark.skip(reason='needs --runslow')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def settings():
    """Testing configuration with invariant checks on."""
    return load_config('testing')


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def make_architecture(n_A, n_B, depth, tau, seed_index=0, master_seed=7):
    a, J = sample_hamiltonian_coefficients(master_seed, seed_index, n_A + n_B)
    return QrnnArchitecture(n_A, n_B, depth, tau, a, J)


@pytest.fixture
def small_arch():
    """n_A = 1, n_B = 1, D = 1 with a random Hamiltonian."""
    return make_architecture(1, 1, 1, 0.7)


@pytest.fixture
def check_arch():
    """n_A = 2, n_B = 1, D = 2 with a random Hamiltonian."""
    return make_architecture(2, 1, 2, 0.4)


@pytest.fixture
def random_params(rng):
    def build(arch):
        return QrnnParameters.random(arch, rng)
    return build


@pytest.fixture(autouse=True)
def invariant_checks():
    """Every test starts with density-matrix checks enabled."""
    set_invariant_checks(True)
    yield
    set_invariant_checks(True)
