import numpy as np
import pytest

from dualrail.fock import FockState
from dualrail.rails import LogicalAmplitudes


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def random_fock_state(rng, modes: int, max_total: int = 3, max_terms: int = 5) -> FockState:
    """Random normalized sparse state with bounded photon number."""
    kets = set()
    for _ in range(int(rng.integers(1, max_terms + 1))):
        total = int(rng.integers(0, max_total + 1))
        ket = [0] * modes
        for _ in range(total):
            ket[int(rng.integers(0, modes))] += 1
        kets.add(tuple(ket))
    terms = {k: complex(rng.normal(), rng.normal()) for k in kets}
    return FockState(modes, terms).normalized()


def random_qubit(rng) -> LogicalAmplitudes:
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    v = v / np.linalg.norm(v)
    return LogicalAmplitudes(complex(v[0]), complex(v[1]))


def random_unitary(rng, dim: int) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q @ np.diag(np.diag(r) / np.abs(np.diag(r)))
