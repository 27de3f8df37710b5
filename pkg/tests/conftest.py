"""Shared fixtures for the kspectral test suite"""

import numpy as np
import pytest

from estimator import jordan_witness, random_admissible


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def witness_2():
    return jordan_witness(2.0)


@pytest.fixture(params=[(2, 1.2, 11), (3, 2.0, 12), (4, 5.0, 13)], ids=["n2-R1.2", "n3-R2", "n4-R5"])
def admissible(request):
    """(matrix, R) pairs with ‖A‖, ‖A⁻¹‖ strictly below R"""
    n, R, seed = request.param
    return random_admissible(n, R, seed), R


def random_unitary(n, rng):
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))
