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
"""Monte Carlo estimators: energy, SR gradient, covariance and correlators.

Every estimator works on a :class:`~slonqs.sampler.SampleBatch`. Batches
from the sampler carry equal weights; exact enumeration batches carry
``|psi|^2 / Z`` weights and go through the very same code.
"""

import logging

from dataclasses import dataclass

import numpy as np
import pandas as pd

from .ansatz import amplitude_ratio, log_amplitude_ratios
from .errors import EstimationError, ObservableError, DimensionError
from .model import diagonal_energy, enumerate_configurations
from .sampler import SampleBatch

__all__ = ['EnergyEstimate', 'CorrelatorReport', 'local_energy',
           'local_energies', 'gradient_F', 'covariance_S', 'energy_estimate',
           'correlators', 'correlator_error']

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EnergyEstimate:
    """Energy expectation value with its statistical error.

    Attributes
    ----------
    mean :      complex
    variance :  float
                Variance of the local energies.
    std_error : float
                ``sqrt(variance / n_samples)``.
    n_samples : int

    """

    mean: complex
    variance: float
    std_error: float
    n_samples: int

    @property
    def real(self):
        """Reported energy (real part of the mean)."""
        return float(np.real(self.mean))

    def __str__(self):
        return (f'<EnergyEstimate({self.real:.8f} +/- {self.std_error:.2e}, '
                f'var={self.variance:.3e}, imag={np.imag(self.mean):.1e})>')


@dataclass(frozen=True)
class CorrelatorReport:
    """Ferro- and antiferromagnetic correlators of a 1D state.

    Attributes
    ----------
    distances : (L-1, ) int array
                ``d = 1 .. L-1``.
    ferro :     (L-1, ) float array
                ``C_d^F = 1/d sum_{l=2}^{d+1} <sz_1 sz_l>``.
    antiferro : (L-1, ) float array
                ``C_d^A = 1/d sum_{l=2}^{d+1} (-1)^(l-1) <sz_1 sz_l>``.
    pairs :     (L-1, ) float array
                ``<sz_1 sz_l>`` for ``l = 2 .. L``.

    """

    distances: np.ndarray
    ferro: np.ndarray
    antiferro: np.ndarray
    pairs: np.ndarray

    @classmethod
    def from_pairs(cls, pairs):
        """Assemble the report from ``<sz_1 sz_l>``, ``l = 2 .. L``."""
        pairs = np.asarray(pairs, dtype=float)
        d = np.arange(1, len(pairs) + 1)
        signs = np.where(d % 2 == 1, -1.0, 1.0)
        return cls(distances=d,
                   ferro=np.cumsum(pairs) / d,
                   antiferro=np.cumsum(signs * pairs) / d,
                   pairs=pairs)

    def to_frame(self):
        """Report as pandas DataFrame (one row per distance)."""
        return pd.DataFrame({'d': self.distances,
                             'pair': self.pairs,
                             'ferro': self.ferro,
                             'antiferro': self.antiferro})

    def at(self, d):
        """``(C_d^F, C_d^A)`` at distance ``d``."""
        return float(self.ferro[d - 1]), float(self.antiferro[d - 1])


def local_energy(h, s, cache):
    """``E_loc(x) = sum_x' H_xx' psi(x') / psi(x)`` for the cached config.

    Parameters
    ----------
    h :         TimHamiltonian
    s :         RbmState
    cache :     ActivationCache

    Returns
    -------
    complex

    """
    e = complex(diagonal_energy(h, cache.config))
    if h.h_x == 0:
        return e
    return e + sum(-h.h_x * amplitude_ratio(s, cache, i)
                   for i in range(s.n_visible))


def local_energies(h, s, configs, thetas=None):
    """Vectorised :func:`local_energy` over ``(N, L)`` configurations."""
    configs = np.asarray(configs)
    e = h.diagonal_energies(configs).astype(np.complex128)
    if h.h_x == 0:
        return e
    ratios = np.exp(log_amplitude_ratios(s, configs, thetas=thetas))
    return e - h.h_x * ratios.sum(axis=1)


def _check(batch):
    if not len(batch):
        raise EstimationError('Can not estimate from an empty sample batch')


def _centered(batch):
    """Weights, centred local energies and centred log-derivatives."""
    w = batch.probabilities
    E = batch.local_energies
    O = batch.log_derivs
    # Shifting by the first sample first makes constant columns exactly zero
    E = E - E[0]
    O = O - O[0]
    E = E - w @ E
    O = O - w @ O
    return w, E, O


def gradient_F(batch):
    """``F_k = <E_loc O_k*> - <E_loc><O_k*>`` over the batch's parameters.

    Parameters
    ----------
    batch :     SampleBatch

    Returns
    -------
    (K, ) array of complex

    """
    _check(batch)
    w, E, O = _centered(batch)
    return (w * E) @ O.conj()


def covariance_S(batch):
    """``S_km = <O_k* O_m> - <O_k*><O_m>`` over the batch's parameters.

    Parameters
    ----------
    batch :     SampleBatch

    Returns
    -------
    (K, K) Hermitian array of complex

    """
    _check(batch)
    w, _, O = _centered(batch)
    S = (O.conj().T * w) @ O
    return 0.5 * (S + S.conj().T)


def energy_estimate(batch):
    """Mean, variance and standard error of the local energies.

    Parameters
    ----------
    batch :     SampleBatch

    Returns
    -------
    EnergyEstimate

    """
    _check(batch)
    w = batch.probabilities
    E = batch.local_energies
    mean = complex(w @ E)
    variance = float(w @ np.abs(E - mean) ** 2)
    if len(batch) == 1:
        variance = 0.0
    return EnergyEstimate(mean=mean,
                          variance=variance,
                          std_error=float(np.sqrt(variance / len(batch))),
                          n_samples=len(batch))


def correlators(source, lattice):
    """Spin-spin correlators ``C_d^F`` and ``C_d^A`` along a chain.

    Parameters
    ----------
    source :    SampleBatch | (N, L) array | (2^L, ) array of complex
                A sample batch (pair expectations as weighted sample
                means), bare sampled configurations (equal weights) or a
                ``2^L`` state vector (exact expectation values).
    lattice :   LatticeSpec
                Must be 1D with at least two sites.

    Returns
    -------
    CorrelatorReport

    """
    if lattice.dimensionality != 1:
        raise ObservableError('Correlators are only available for 1D chains, '
                              f'got {lattice}')
    L = lattice.n_sites
    if L < 2:
        raise ObservableError(f'Correlators need at least 2 sites, got {L}')

    if isinstance(source, SampleBatch):
        _check(source)
        configs = source.configurations.astype(float)
        w = source.probabilities
    elif np.ndim(source) == 2:
        configs = np.asarray(source, dtype=float)
        if not len(configs):
            raise EstimationError('Can not estimate from zero configurations')
        w = np.full(len(configs), 1 / len(configs))
    else:
        vec = np.asarray(source)
        if vec.shape != (2 ** L, ):
            raise DimensionError(f'Expected state vector of length {2 ** L}, '
                                 f'got {vec.shape}')
        configs = enumerate_configurations(L).astype(float)
        w = np.abs(vec) ** 2
        w = w / w.sum()

    if configs.shape[1] != L:
        raise DimensionError(f'Configurations have {configs.shape[1]} sites, '
                             f'lattice has {L}')

    pairs = w @ (configs[:, :1] * configs[:, 1:])
    return CorrelatorReport.from_pairs(pairs)


def correlator_error(report, reference, d=None):
    """Absolute correlator errors against a reference report.

    Parameters
    ----------
    report :    CorrelatorReport
    reference : CorrelatorReport
    d :         int, optional
                Distance; defaults to the largest (``L - 1``).

    Returns
    -------
    dict
                ``{'ferro': |dC^F|, 'antiferro': |dC^A|}``

    """
    if d is None:
        d = int(report.distances[-1])
    f1, a1 = report.at(d)
    f2, a2 = reference.at(d)
    return {'ferro': abs(f1 - f2), 'antiferro': abs(a1 - a2)}
