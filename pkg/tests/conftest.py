import numpy as np
import pytest

import slonqs


def pytest_addoption(parser):
    parser.addoption('--runslow', action='store_true', default=False,
                     help='run slow end-to-end tests')


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: long running end-to-end test')


def pytest_collection_modifyitems(config, items):
    if config.getoption('--runslow'):
        return
    skip_slow = pytest.mark.skip(reason='needs --runslow option to run')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip_slow)


def pauli_hamiltonian(h):
    """Dense Hamiltonian assembled from Kronecker products of Pauli matrices."""
    L = h.n_sites
    sz = np.diag([1.0, -1.0])
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])

    def site_op(op, i):
        out = np.ones((1, 1))
        for k in range(L):
            out = np.kron(out, op if k == i else np.eye(2))
        return out

    H = np.zeros((2 ** L, 2 ** L))
    for i, j in h.lattice.bonds:
        H += h.J * site_op(sz, i) @ site_op(sz, j)
    for i in range(L):
        H -= h.h_z * site_op(sz, i) + h.h_x * site_op(sx, i)
    return H


@pytest.fixture
def chain4():
    return slonqs.TimHamiltonian(slonqs.build_lattice(1, 4), J=1, h_x=0.5, h_z=0.5)


@pytest.fixture
def random_state():
    """Small RBM with weights large enough to give a non-trivial |psi|^2."""
    rng = np.random.default_rng(42)
    L, alpha = 4, 2
    a = 0.3 * (rng.normal(size=L) + 1j * rng.normal(size=L))
    W = 0.4 * (rng.normal(size=(alpha * L, L)) + 1j * rng.normal(size=(alpha * L, L)))
    return slonqs.RbmState(a, W, alpha)
