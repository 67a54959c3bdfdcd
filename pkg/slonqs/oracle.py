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
"""Exact references for small systems.

Exact diagonalization gives ground state energies and correlators; full
enumeration of ``|psi|^2`` gives exact values of the Monte Carlo
estimators for a given RBM.
"""

import json
import logging
import os

from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as sla

from .ansatz import log_amplitudes
from .errors import CapabilityError
from .estimator import CorrelatorReport, correlators, energy_estimate, gradient_F, covariance_S
from .model import enumerate_configurations
from .sampler import make_batch

__all__ = ['EdResult', 'ed_ground_state', 'ed_correlators', 'exact_batch',
           'exact_expectations', 'FixtureStore', 'fixture_key']

logger = logging.getLogger(__name__)

# Largest system handled by exact diagonalization
MAX_ED_SITES = 16

# Up to this size the Hamiltonian is diagonalised as a dense matrix
MAX_DENSE_SITES = 10

# Largest system for full enumeration of an RBM
MAX_ENUMERATION_SITES = 12


@dataclass(frozen=True)
class EdResult:
    """Exact ground state.

    Attributes
    ----------
    ground_energy : float
    ground_vector : (2^L, ) complex array
                    Normalised; global phase fixed so that the largest
                    component is real and positive.
    gap :           float
                    ``E_1 - E_0`` (NaN for a single basis state).

    """

    ground_energy: float
    ground_vector: np.ndarray
    gap: float

    def __str__(self):
        return (f'<EdResult(E_gs={self.ground_energy:.10f}, gap={self.gap:.4e}, '
                f'dim={len(self.ground_vector)})>')

    def residual(self, h):
        """``||H v - E v||``."""
        H = h.to_sparse()
        v = self.ground_vector
        return float(np.linalg.norm(H @ v - self.ground_energy * v))


def ed_ground_state(h, max_sites=MAX_ED_SITES):
    """Exact ground state of ``h``.

    Dense diagonalization for up to ``MAX_DENSE_SITES`` sites, Lanczos
    (``scipy.sparse.linalg.eigsh``) above that.

    Parameters
    ----------
    h :         TimHamiltonian
    max_sites : int

    Returns
    -------
    EdResult

    """
    L = h.n_sites
    if L > max_sites:
        raise CapabilityError(f'Exact diagonalization limited to {max_sites} sites, got {L}')

    H = h.to_sparse()
    if L <= MAX_DENSE_SITES:
        evals, evecs = np.linalg.eigh(H.toarray())
    else:
        v0 = np.ones(H.shape[0]) / np.sqrt(H.shape[0])
        evals, evecs = sla.eigsh(H, k=2, which='SA', tol=1e-12, v0=v0)
        order = np.argsort(evals)
        evals, evecs = evals[order], evecs[:, order]

    vec = evecs[:, 0].astype(np.complex128)
    vec /= np.linalg.norm(vec)
    k = np.argmax(np.abs(vec))
    vec *= np.abs(vec[k]) / vec[k]

    gap = float(evals[1] - evals[0]) if len(evals) > 1 else float('nan')
    result = EdResult(ground_energy=float(evals[0]), ground_vector=vec, gap=gap)

    residual = result.residual(h)
    if residual > 1e-8:
        logger.warning(f'ED residual {residual:.2e} above tolerance for {h}')
    logger.debug(f'ED for {h}: {result}')
    return result


def ed_correlators(r, lattice):
    """Exact ``C_d^F`` / ``C_d^A`` of an ED ground state.

    Parameters
    ----------
    r :         EdResult
    lattice :   LatticeSpec

    Returns
    -------
    CorrelatorReport

    """
    return correlators(r.ground_vector, lattice)


def exact_batch(h, s, indices=None):
    """Batch over all ``2^L`` configurations weighted by ``|psi|^2``.

    Parameters
    ----------
    h :         TimHamiltonian
    s :         RbmState
    indices :   array of int, optional
                Parameter indices; defaults to all.

    Returns
    -------
    SampleBatch

    """
    L = h.n_sites
    if L > MAX_ENUMERATION_SITES:
        raise CapabilityError(f'Full enumeration limited to {MAX_ENUMERATION_SITES} '
                              f'sites, got {L}')
    configs = enumerate_configurations(L)
    log_p = 2 * log_amplitudes(s, configs).real
    p = np.exp(log_p - log_p.max())
    return make_batch(s, h, configs, indices=indices, weights=p / p.sum())


def exact_expectations(h, s, indices=None):
    """Exact energy, gradient and covariance of ``s`` by full enumeration.

    Parameters
    ----------
    h :         TimHamiltonian
    s :         RbmState
    indices :   array of int, optional

    Returns
    -------
    energy :    complex
    F :         (K, ) complex array
    S :         (K, K) complex array

    """
    batch = exact_batch(h, s, indices=indices)
    return energy_estimate(batch).mean, gradient_F(batch), covariance_S(batch)


def fixture_key(h):
    """Key of a Hamiltonian in the fixture store, e.g. ``1d-10|J=1|hx=0.5|hz=0.5``."""
    shape = 'x'.join(str(e) for e in h.lattice.extents)
    return (f'{h.lattice.dimensionality}d-{shape}|J={h.J:.15g}|'
            f'hx={h.h_x:.15g}|hz={h.h_z:.15g}')


class FixtureStore:
    """JSON file of reference energies and correlators.

    Parameters
    ----------
    fp :        str, optional
                File to read from / write to. Missing files start empty.

    """

    def __init__(self, fp=None):
        self.fp = fp
        self._data = {}
        if fp and os.path.isfile(fp):
            with open(fp, 'r') as f:
                self._data = json.load(f)

    def __len__(self):
        return len(self._data)

    def __contains__(self, h):
        return fixture_key(h) in self._data

    def __str__(self):
        return f'<FixtureStore(file={self.fp}, entries={len(self)})>'

    def get(self, h):
        """Reference entry for ``h`` or ``None``."""
        return self._data.get(fixture_key(h), None)

    def ground_energy(self, h):
        entry = self.get(h)
        return None if entry is None else entry['ground_energy']

    def correlators(self, h):
        """Stored :class:`CorrelatorReport` for ``h`` or ``None``."""
        entry = self.get(h)
        if not entry or entry.get('pairs') is None:
            return None
        return CorrelatorReport.from_pairs(entry['pairs'])

    def add(self, h, result):
        """Store an :class:`EdResult` (and its correlators for chains)."""
        entry = {'model': h.as_dict(),
                 'ground_energy': result.ground_energy,
                 'gap': result.gap,
                 'residual': result.residual(h),
                 'pairs': None}
        if h.lattice.dimensionality == 1 and h.n_sites > 1:
            entry['pairs'] = ed_correlators(result, h.lattice).pairs.tolist()
        self._data[fixture_key(h)] = entry
        return entry

    def to_file(self, fp=None):
        fp = fp or self.fp
        if not fp:
            raise ValueError('No file given to write fixtures to')
        with open(fp, 'w') as f:
            f.write(json.dumps(self._data, indent=4, sort_keys=True))
        logger.info(f'Fixtures written to {fp}')
