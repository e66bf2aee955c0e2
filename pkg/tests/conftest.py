import numpy as np
import pytest

from sepcert.linalg import BipartiteState, hermitian_part


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


def random_hermitian(n, rng):
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return hermitian_part(g)


def random_state(dA, dB, rng):
    n = dA * dB
    a = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / np.sqrt(2.0)
    rho = a @ a.conj().T
    return BipartiteState(dA, dB, rho / np.trace(rho).real)
