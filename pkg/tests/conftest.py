import numpy as np
import pytest

from qslkit.core import qubit_density


def random_bloch(rng, n=None, pure=False):
    shape = (3,) if n is None else (n, 3)
    v = rng.standard_normal(shape)
    v /= np.linalg.norm(v, axis=-1, keepdims=True)
    if pure:
        return v
    r = rng.random(() if n is None else (n, 1)) ** (1 / 3)
    return v * r


def random_qubit(rng, pure=False):
    return qubit_density(random_bloch(rng, pure=pure))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
