import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_rotation(rng, n: int) -> np.ndarray:
    """Haar-ish random rotation from the QR of a Gaussian matrix."""
    m = rng.normal(size=(n, n))
    q, r = np.linalg.qr(m)
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q
