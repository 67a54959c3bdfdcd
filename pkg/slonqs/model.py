#    Sequential local optimization of neural network quantum states.
#
#    Copyright (C) 2024 The slonqs developers
#
#    This program is free software: you can redistribute it and/or modify
#    it under the terms of the GNU General Public License as published by
#    the Free Software Foundation, either version 3 of the License, or
#    (at your option) any later version.
#
#    This program is distributed in the hope that it will be useful,
#    but WITHOUT ANY WARRANTY; without even the implied warranty of
#    MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
#    GNU General Public License for more details.
"""Lattices and the tilted Ising Hamiltonian.

Sites are indexed 0-based; 2D grids are indexed row-major with
``extents = (n_rows, n_cols)``. All boundaries are open.

Spin configurations are plain numpy arrays of ``+1``/``-1`` (``int8``).
Batches of configurations are ``(N, L)`` arrays.
"""

import logging

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sparse

from .errors import GeometryError, DimensionError, CapabilityError
from .utils import as_extents

__all__ = ['LatticeSpec', 'TimHamiltonian', 'build_lattice',
           'as_configuration', 'diagonal_energy', 'connected_configurations',
           'enumerate_configurations', 'configuration_index']

logger = logging.getLogger(__name__)

# Limit for building sparse matrices over the full Hilbert space
MAX_SPARSE_SITES = 20


@dataclass(frozen=True)
class LatticeSpec:
    """Open-boundary chain or rectangular grid.

    Parameters
    ----------
    extents :   tuple of int
                ``(L, )`` for a chain, ``(n_rows, n_cols)`` for a grid.
    bonds :     tuple of (int, int)
                Nearest-neighbour pairs ``(i, j)`` with ``i < j``.

    """

    extents: tuple
    bonds: tuple = field(repr=False)

    @property
    def dimensionality(self):
        return len(self.extents)

    @property
    def n_sites(self):
        return int(np.prod(self.extents))

    @property
    def bond_array(self):
        """Bonds as ``(n_bonds, 2)`` integer array."""
        return np.asarray(self.bonds, dtype=np.intp).reshape(-1, 2)

    def site_index(self, row, col=0):
        """Row-major site index of ``(row, col)``."""
        if self.dimensionality == 1:
            return int(row)
        return int(row) * self.extents[1] + int(col)

    def site_coords(self, i):
        """Inverse of :meth:`site_index`."""
        if self.dimensionality == 1:
            return (int(i), )
        return divmod(int(i), self.extents[1])

    def __str__(self):
        shape = 'x'.join(str(e) for e in self.extents)
        return f'<LatticeSpec({self.dimensionality}D, {shape}, bonds={len(self.bonds)})>'

    def as_dict(self):
        return {'dimensionality': self.dimensionality,
                'extents': list(self.extents)}


def build_lattice(dimensionality, extents):
    """Build an open-boundary chain or grid.

    Parameters
    ----------
    dimensionality :    1 | 2
    extents :           int | list of int
                        ``L`` (or ``[L]``) for chains, ``[n_rows, n_cols]``
                        for grids.

    Returns
    -------
    LatticeSpec

    """
    if dimensionality not in (1, 2):
        raise GeometryError(f'Dimensionality must be 1 or 2, got {dimensionality}')

    extents = as_extents(extents)
    if len(extents) != dimensionality:
        raise GeometryError(f'Expected {dimensionality} extent(s), got {extents}')
    if any(e <= 0 for e in extents):
        raise GeometryError(f'Extents must be positive, got {extents}')

    if dimensionality == 1:
        bonds = tuple((i, i + 1) for i in range(extents[0] - 1))
    else:
        n_rows, n_cols = extents
        # Horizontal bonds first, then vertical ones
        horizontal = [(r * n_cols + c, r * n_cols + c + 1)
                      for r in range(n_rows) for c in range(n_cols - 1)]
        vertical = [(r * n_cols + c, (r + 1) * n_cols + c)
                    for r in range(n_rows - 1) for c in range(n_cols)]
        bonds = tuple(horizontal + vertical)

    return LatticeSpec(extents=extents, bonds=bonds)


@dataclass(frozen=True)
class TimHamiltonian:
    """Tilted Ising model ``H = sum_<ij> J sz_i sz_j - sum_i (h_z sz_i + h_x sx_i)``.

    Parameters
    ----------
    lattice :   LatticeSpec
    J :         float
                Nearest-neighbour coupling.
    h_x :       float
                Transverse field.
    h_z :       float
                Longitudinal field.

    """

    lattice: LatticeSpec
    J: float = 1.0
    h_x: float = 0.5
    h_z: float = 0.5

    @property
    def n_sites(self):
        return self.lattice.n_sites

    def __str__(self):
        return (f'<TimHamiltonian(lattice={self.lattice}, J={self.J}, '
                f'h_x={self.h_x}, h_z={self.h_z})>')

    def as_dict(self):
        d = self.lattice.as_dict()
        d.update({'J': self.J, 'h_x': self.h_x, 'h_z': self.h_z})
        return d

    def diagonal_energies(self, configs):
        """Vectorised :func:`diagonal_energy` over an ``(N, L)`` batch."""
        configs = np.asarray(configs, dtype=float)
        if configs.ndim != 2 or configs.shape[1] != self.n_sites:
            raise DimensionError(f'Expected (N, {self.n_sites}) configurations, '
                                 f'got {configs.shape}')
        bonds = self.lattice.bond_array
        if len(bonds):
            zz = (configs[:, bonds[:, 0]] * configs[:, bonds[:, 1]]).sum(axis=1)
        else:
            zz = np.zeros(len(configs))
        return self.J * zz - self.h_z * configs.sum(axis=1)

    def to_sparse(self):
        """Assemble the full ``2^L x 2^L`` Hamiltonian as CSR matrix.

        Basis states are ordered as by :func:`enumerate_configurations`.
        """
        L = self.n_sites
        if L > MAX_SPARSE_SITES:
            raise CapabilityError(f'Refusing to build a 2^{L} dimensional matrix')

        dim = 2 ** L
        rows = [np.arange(dim)]
        cols = [np.arange(dim)]
        vals = [self.diagonal_energies(enumerate_configurations(L))]
        if self.h_x != 0:
            for i in range(L):
                rows.append(np.arange(dim))
                cols.append(np.arange(dim) ^ (1 << (L - 1 - i)))
                vals.append(np.full(dim, -self.h_x))

        H = sparse.coo_matrix((np.concatenate(vals),
                               (np.concatenate(rows), np.concatenate(cols))),
                              shape=(dim, dim))
        return H.tocsr()


def as_configuration(x, n_sites=None):
    """Validate and convert ``x`` into a spin configuration.

    Parameters
    ----------
    x :         list-like
                Values must all be ``+1`` or ``-1``.
    n_sites :   int, optional
                If given, length must match.

    Returns
    -------
    np.ndarray
                ``int8`` array.

    """
    x = np.asarray(x)
    if x.ndim != 1:
        raise DimensionError(f'Configuration must be 1-dimensional, got shape {x.shape}')
    if n_sites is not None and len(x) != n_sites:
        raise DimensionError(f'Configuration has {len(x)} spins, lattice has {n_sites} sites')
    if not np.all(np.abs(x) == 1):
        raise ValueError(f'Spins must be +1 or -1, got {x}')
    return x.astype(np.int8)


def diagonal_energy(h, x):
    """Diagonal matrix element ``sum_bonds J x_i x_j - h_z sum_i x_i``.

    Parameters
    ----------
    h :         TimHamiltonian
    x :         list-like
                Spin configuration.

    Returns
    -------
    float

    """
    x = as_configuration(x, h.n_sites)
    return float(h.diagonal_energies(x[None, :])[0])


def connected_configurations(h, x):
    """Off-diagonal elements of row ``x`` as ``(flip site, element)`` pairs.

    Every single spin flip connects to ``x`` with element ``-h_x``.

    Parameters
    ----------
    h :         TimHamiltonian
    x :         list-like
                Spin configuration.

    Returns
    -------
    list of (int, float)

    """
    x = as_configuration(x, h.n_sites)
    return [(i, -float(h.h_x)) for i in range(len(x))]


def enumerate_configurations(n_sites):
    """All ``2^L`` configurations as ``(2^L, L)`` int8 array.

    Row ``k`` is the basis state whose binary representation (site 0 as
    most significant bit) has a 0 for spin up (+1) and 1 for spin down (-1).
    This matches Kronecker products ordered by site.
    """
    idx = np.arange(2 ** n_sites)[:, None]
    bits = (idx >> np.arange(n_sites - 1, -1, -1)[None, :]) & 1
    return (1 - 2 * bits).astype(np.int8)


def configuration_index(configs):
    """Inverse of :func:`enumerate_configurations` for ``(N, L)`` input."""
    configs = np.atleast_2d(configs)
    L = configs.shape[1]
    bits = (configs < 0).astype(np.int64)
    return bits @ (1 << np.arange(L - 1, -1, -1))
