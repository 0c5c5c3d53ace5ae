import numpy as np
import pytest

from rbtlab.pauli import superop_from_kraus


def random_unitary(rng: np.random.Generator) -> np.ndarray:
    """Haar-random 2x2 unitary via QR of a complex Gaussian matrix."""
    g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_kraus(rng: np.random.Generator, rank: int = 3):
    """Kraus operators of a random CPTP qubit map (Stinespring dilation)."""
    g = rng.normal(size=(2 * rank, 2)) + 1j * rng.normal(size=(2 * rank, 2))
    q, _ = np.linalg.qr(g)
    return [q[2 * k : 2 * k + 2, :] for k in range(rank)]


def random_cptp_superop(rng: np.random.Generator, rank: int = 3) -> np.ndarray:
    return superop_from_kraus(random_kraus(rng, rank))


def random_unital_tp_superop(rng: np.random.Generator) -> np.ndarray:
    """Random unital trace-preserving transfer matrix (not necessarily CP)."""
    s = np.zeros((4, 4))
    s[0, 0] = 1.0
    s[1:, 1:] = rng.uniform(-1.0, 1.0, size=(3, 3))
    return s


@pytest.fixture
def rng():
    return np.random.default_rng(20240901)
