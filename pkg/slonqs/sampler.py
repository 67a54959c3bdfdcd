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
"""Metropolis-Hastings sampling of ``|psi(x)|^2`` with single spin flips."""

import logging

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .ansatz import (ActivationCache, amplitude_ratio, apply_flip,
                     log_derivatives_batch)
from .errors import DimensionError
from .utils import logcosh, normalized_weights

__all__ = ['SamplerConfig', 'SampleBatch', 'metropolis_step', 'run_chain',
           'sample_configurations', 'make_batch']

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SamplerConfig:
    """Settings for one sampling phase.

    Parameters
    ----------
    n_samples :     int
                    Recorded samples per phase (N_s).
    n_thermal :     int
                    Burn-in in lattice sweeps (``n_thermal * L`` attempted
                    flips per chain).
    stride :        int, optional
                    Attempted flips between recorded samples. Defaults to
                    ``L`` (one lattice sweep).
    seed :          int
                    Chain ``c`` uses ``seed + c``.
    n_chains :      int
                    Independent chains; samples are split as evenly as
                    possible and concatenated by chain.

    """

    n_samples: int = 10_000
    n_thermal: int = 100
    stride: Optional[int] = None
    seed: int = 0
    n_chains: int = 1

    def validate(self):
        for name in ('n_samples', 'n_thermal', 'n_chains'):
            if getattr(self, name) < 1:
                raise ValueError(f'{name} must be positive, got {getattr(self, name)}')
        if self.stride is not None and self.stride < 1:
            raise ValueError(f'stride must be positive, got {self.stride}')
        if self.n_chains > self.n_samples:
            raise ValueError(f'Got {self.n_chains} chains for {self.n_samples} samples')
        return self

    def resolve_stride(self, n_sites):
        return int(self.stride) if self.stride else int(n_sites)

    def with_seed(self, seed):
        return replace(self, seed=int(seed))

    def as_dict(self):
        return {'n_samples': self.n_samples, 'n_thermal': self.n_thermal,
                'stride': self.stride, 'seed': self.seed,
                'n_chains': self.n_chains}


@dataclass
class SampleBatch:
    """Sampled configurations with their local energies and log-derivatives.

    Attributes
    ----------
    configurations :    (N, L) int8 array
    local_energies :    (N, ) complex array
    log_derivs :        (N, K) complex array
                        Restricted to the parameters in ``indices``.
    indices :           (K, ) int array
                        Flattened parameter indices of the columns of
                        ``log_derivs``.
    weights :           (N, ) float array, optional
                        Probability weights. ``None`` means equal weights
                        (Monte Carlo samples); exact enumeration passes
                        ``|psi|^2 / Z``.
    acceptance :        float
                        Fraction of accepted flips (NaN if not sampled).

    """

    configurations: np.ndarray
    local_energies: np.ndarray
    log_derivs: np.ndarray
    indices: np.ndarray
    weights: Optional[np.ndarray] = None
    acceptance: float = field(default=float('nan'))

    def __post_init__(self):
        n = len(self.configurations)
        if len(self.local_energies) != n or len(self.log_derivs) != n:
            raise DimensionError('Configurations, local energies and log-derivatives '
                                 f'differ in length: {n}, {len(self.local_energies)}, '
                                 f'{len(self.log_derivs)}')
        if self.weights is not None and len(self.weights) != n:
            raise DimensionError(f'Got {len(self.weights)} weights for {n} samples')

    def __len__(self):
        return len(self.configurations)

    def __str__(self):
        return (f'<SampleBatch(samples={len(self)}, parameters={len(self.indices)}, '
                f'acceptance={self.acceptance:.3f})>')

    def __repr__(self):
        return self.__str__()

    @property
    def probabilities(self):
        """Normalised sample weights."""
        return normalized_weights(self.weights, len(self))


def metropolis_step(s, cache, rng):
    """Attempt to flip one uniformly chosen spin.

    Parameters
    ----------
    s :         RbmState
    cache :     ActivationCache
                Updated in place on acceptance.
    rng :       np.random.Generator

    Returns
    -------
    accepted :  bool
    cache :     ActivationCache

    """
    site = int(rng.integers(s.n_visible))
    ratio = amplitude_ratio(s, cache, site)
    if rng.random() < min(1.0, abs(ratio) ** 2):
        return True, apply_flip(cache, s, site)
    return False, cache


class _Walkers:
    """Independent single-flip chains advanced in lock-step.

    Each chain draws its start configuration, proposals and acceptance
    thresholds from its own generator, so its trajectory does not depend
    on how many other chains run alongside it. Given the same site and
    threshold, a step makes the same decision as :func:`metropolis_step`.
    """

    def __init__(self, s, seeds, n_steps):
        self.s = s
        L = s.n_visible
        self.configs = np.empty((len(seeds), L), dtype=np.int8)
        self.sites = np.empty((len(seeds), n_steps), dtype=np.intp)
        self.log_u = np.empty((len(seeds), n_steps))
        for c, seed in enumerate(seeds):
            rng = np.random.default_rng(seed)
            self.configs[c] = rng.choice(np.array([-1, 1], dtype=np.int8), size=L)
            self.sites[c] = rng.integers(0, L, size=n_steps)
            self.log_u[c] = np.log(rng.random(n_steps))

        self.thetas = self.configs.astype(float) @ s.W.T
        self.lc = logcosh(self.thetas)
        self.step_count = 0
        self.accepted = 0
        self._rows = np.arange(len(seeds))

    def advance(self, n):
        s = self.s
        rows = self._rows
        for _ in range(n):
            k = self.step_count
            site = self.sites[:, k]
            xi = self.configs[rows, site].astype(float)
            new_theta = self.thetas - 2.0 * s.W[:, site].T * xi[:, None]
            new_lc = logcosh(new_theta)
            log_ratio = -2.0 * s.a[site] * xi + (new_lc - self.lc).sum(axis=1)
            # Accept with probability min(1, |ratio|^2)
            accept = self.log_u[:, k] < 2.0 * log_ratio.real
            if accept.any():
                self.configs[rows[accept], site[accept]] *= -1
                self.thetas[accept] = new_theta[accept]
                self.lc[accept] = new_lc[accept]
                self.accepted += int(accept.sum())
            self.step_count += 1


def _samples_per_chain(n_samples, n_chains):
    base, extra = divmod(n_samples, n_chains)
    return np.array([base + (c < extra) for c in range(n_chains)])


def sample_configurations(s, cfg):
    """Draw configurations from ``|psi|^2``.

    Parameters
    ----------
    s :         RbmState
    cfg :       SamplerConfig

    Returns
    -------
    configs :       (N_s, L) int8 array
                    Ordered by (chain, sample).
    acceptance :    float

    """
    cfg.validate()
    L = s.n_visible
    stride = cfg.resolve_stride(L)
    counts = _samples_per_chain(cfg.n_samples, cfg.n_chains)
    n_burn = cfg.n_thermal * L
    n_record = int(counts.max())

    walkers = _Walkers(s, [cfg.seed + c for c in range(cfg.n_chains)],
                       n_burn + n_record * stride)
    walkers.advance(n_burn)

    recorded = np.empty((n_record, cfg.n_chains, L), dtype=np.int8)
    for k in range(n_record):
        walkers.advance(stride)
        recorded[k] = walkers.configs

    configs = np.concatenate([recorded[:counts[c], c] for c in range(cfg.n_chains)])
    acceptance = walkers.accepted / (walkers.step_count * cfg.n_chains)
    logger.debug(f'Sampled {len(configs)} configurations '
                 f'(acceptance {acceptance:.3f})')
    return configs, acceptance


def make_batch(s, h, configs, indices=None, weights=None, acceptance=float('nan')):
    """Evaluate local energies and restricted log-derivatives for ``configs``.

    Parameters
    ----------
    s :         RbmState
    h :         TimHamiltonian
    configs :   (N, L) array
    indices :   array of int, optional
                Parameter indices to keep; defaults to all.
    weights :   (N, ) array, optional

    Returns
    -------
    SampleBatch

    """
    # Lazy import to avoid circular dependency
    from .estimator import local_energies

    configs = np.asarray(configs, dtype=np.int8)
    if indices is None:
        indices = np.arange(s.n_params)
    indices = np.asarray(indices, dtype=np.intp)

    thetas = configs.astype(float) @ s.W.T
    return SampleBatch(configurations=configs,
                       local_energies=local_energies(h, s, configs, thetas=thetas),
                       log_derivs=log_derivatives_batch(s, configs, indices, thetas=thetas),
                       indices=indices,
                       weights=weights,
                       acceptance=acceptance)


def run_chain(s, cfg, h, active_params=None):
    """Sample ``cfg.n_samples`` configurations and evaluate them.

    Every chain starts from a uniformly random configuration, performs
    ``n_thermal * L`` attempted flips of burn-in and then records one
    sample every ``stride`` attempted flips.

    Parameters
    ----------
    s :             RbmState
    cfg :           SamplerConfig
    h :             TimHamiltonian
    active_params : ParameterBlock | array of int, optional
                    Parameters whose log-derivatives are stored. Defaults
                    to all parameters.

    Returns
    -------
    SampleBatch

    """
    if h.n_sites != s.n_visible:
        raise DimensionError(f'Hamiltonian has {h.n_sites} sites, ansatz '
                             f'{s.n_visible} visible spins')
    indices = getattr(active_params, 'indices', active_params)
    configs, acceptance = sample_configurations(s, cfg)
    return make_batch(s, h, configs, indices=indices, acceptance=acceptance)
