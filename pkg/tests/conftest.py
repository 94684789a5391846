import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_unitary(d: int, seed: int) -> np.ndarray:
    """Haar unitary via QR of a complex Gaussian matrix."""
    gen = np.random.default_rng(seed)
    z = gen.standard_normal((d, d)) + 1j * gen.standard_normal((d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))
