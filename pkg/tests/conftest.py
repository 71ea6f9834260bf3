import numpy as np
import pytest


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)


def random_real_spectrum_hamiltonian(rng, dim, cond=3.0):
    """Similarity transform of a random Hermitian matrix: real spectrum
    and genuinely non-Hermitian for a non-unitary transform."""
    A = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = (A + A.conj().T) / 2
    B = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    # positive-definite similarity factor with moderate conditioning
    S = (B @ B.conj().T) / dim + np.eye(dim) / cond
    return S @ h @ np.linalg.inv(S)
