import numpy as np
import pytest

from qutricav.hilbert import SubsystemLayout
from qutricav.kernel import available_backends


@pytest.fixture
def layout():
    return SubsystemLayout()


@pytest.fixture
def rng():
    return np.random.default_rng(42)


def random_hermitian(rng, n):
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (m + m.conj().T)


def random_state(rng, n):
    amps = rng.normal(size=n) + 1j * rng.normal(size=n)
    return amps / np.linalg.norm(amps)


def random_density(rng, n):
    """Random full-rank density matrix (PSD, unit trace)."""
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = m @ m.conj().T
    return rho / np.trace(rho).real


def pytest_generate_tests(metafunc):
    if "kernel_backend" in metafunc.fixturenames:
        metafunc.parametrize("kernel_backend", available_backends())
