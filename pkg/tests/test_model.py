import numpy as np
import pytest

import slonqs

from conftest import pauli_hamiltonian


@pytest.mark.parametrize("dim,extents,n_sites,bonds", [
    (1, [4], 4, {(0, 1), (1, 2), (2, 3)}),
    (1, 1, 1, set()),
    (2, [2, 2], 4, {(0, 1), (2, 3), (0, 2), (1, 3)}),
])
def test_build_lattice(dim, extents, n_sites, bonds):
    lat = slonqs.build_lattice(dim, extents)
    assert lat.n_sites == n_sites
    assert set(lat.bonds) == bonds
    assert len(set(lat.bonds)) == len(lat.bonds)
    assert isinstance(lat.__str__(), str)


@pytest.mark.parametrize("extents", [(8, 8), (3, 5), (1, 6)])
def test_grid_bond_count(extents):
    lat = slonqs.build_lattice(2, extents)
    nx, ny = extents
    assert len(lat.bonds) == nx * (ny - 1) + ny * (nx - 1)
    assert all(0 <= i < j < lat.n_sites for i, j in lat.bonds)


def test_grid_112_bonds():
    lat = slonqs.build_lattice(2, [8, 8])
    assert lat.n_sites == 64
    assert len(lat.bonds) == 112


def test_site_index_roundtrip():
    lat = slonqs.build_lattice(2, (3, 4))
    for i in range(lat.n_sites):
        assert lat.site_index(*lat.site_coords(i)) == i


@pytest.mark.parametrize("dim,extents", [(1, [0]), (1, [-2]), (2, [3, 0]),
                                         (3, [2, 2, 2]), (2, [4])])
def test_invalid_geometry(dim, extents):
    with pytest.raises(slonqs.GeometryError):
        slonqs.build_lattice(dim, extents)


@pytest.mark.parametrize("L,J,h_z,x,expected", [
    (3, 1, 0.5, (1, 1, 1), 0.5),
    (4, 1, 0.5, (1, -1, 1, -1), -3),
    (2, -1, 0, (1, 1), -1),
])
def test_diagonal_energy(L, J, h_z, x, expected):
    h = slonqs.TimHamiltonian(slonqs.build_lattice(1, L), J=J, h_x=0.5, h_z=h_z)
    assert slonqs.diagonal_energy(h, x) == pytest.approx(expected)


def test_diagonal_energy_flip_symmetry():
    h = slonqs.TimHamiltonian(slonqs.build_lattice(2, (2, 3)), J=0.7, h_x=0.3, h_z=0)
    for x in slonqs.enumerate_configurations(6):
        assert slonqs.diagonal_energy(h, x) == slonqs.diagonal_energy(h, -x)


def test_diagonal_energy_dimension_mismatch(chain4):
    with pytest.raises(slonqs.DimensionError):
        slonqs.diagonal_energy(chain4, (1, 1, 1))
    with pytest.raises(ValueError):
        slonqs.diagonal_energy(chain4, (1, 0, 1, 1))


def test_connected_configurations():
    h = slonqs.TimHamiltonian(slonqs.build_lattice(1, 2), J=1, h_x=0.5, h_z=0.5)
    assert slonqs.connected_configurations(h, (1, -1)) == [(0, -0.5), (1, -0.5)]

    h0 = slonqs.TimHamiltonian(slonqs.build_lattice(1, 4), J=1, h_x=0, h_z=0.5)
    conn = slonqs.connected_configurations(h0, (1, 1, -1, 1))
    assert len(conn) == 4
    assert all(el == 0 for _, el in conn)


def test_enumeration_order():
    configs = slonqs.enumerate_configurations(3)
    assert configs.shape == (8, 3)
    assert configs[0].tolist() == [1, 1, 1]
    assert configs[1].tolist() == [1, 1, -1]
    assert configs[-1].tolist() == [-1, -1, -1]
    assert np.array_equal(slonqs.configuration_index(configs), np.arange(8))


@pytest.mark.parametrize("dim,extents", [(1, 5), (2, (2, 3))])
def test_sparse_matches_pauli(dim, extents):
    h = slonqs.TimHamiltonian(slonqs.build_lattice(dim, extents), J=1, h_x=0.7, h_z=0.3)
    H = h.to_sparse().toarray()
    assert np.allclose(H, H.T)
    assert np.allclose(H, pauli_hamiltonian(h))


def test_sparse_rows_match_matrix_elements(chain4):
    H = chain4.to_sparse().toarray()
    configs = slonqs.enumerate_configurations(4)
    for k, x in enumerate(configs):
        assert H[k, k] == pytest.approx(slonqs.diagonal_energy(chain4, x))
        for site, el in slonqs.connected_configurations(chain4, x):
            y = x.copy()
            y[site] *= -1
            assert H[k, slonqs.configuration_index(y)[0]] == pytest.approx(el)
