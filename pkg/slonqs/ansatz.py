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
"""Complex restricted Boltzmann machine without hidden biases.

The amplitude is ``psi(x) = exp(a.x) prod_j 2cosh(theta_j)`` with
``theta_j = sum_i W_ji x_i``. Parameters are flattened as
``[a_0 .. a_{L-1}, W_00, W_01, .., W_{M-1,L-1}]`` (W row-major).
"""

import copy
import json
import logging

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .model import as_configuration
from .utils import logcosh, to_complex_pairs, from_complex_pairs, chunks

__all__ = ['RbmState', 'ActivationCache', 'init_parameters', 'log_amplitude',
           'log_amplitudes', 'log_derivatives', 'log_derivatives_batch',
           'amplitude_ratio', 'log_amplitude_ratios', 'apply_flip']

logger = logging.getLogger(__name__)

# Upper bound on the number of complex entries held in temporary
# (N, L, M) arrays when evaluating all single-flip ratios at once
_RATIO_CHUNK_ENTRIES = 2 ** 21


class RbmState:
    """Parameters of the RBM ansatz.

    Parameters
    ----------
    a :         (L, ) array of complex
                Visible biases.
    W :         (M, L) array of complex
                Weights; ``M`` must equal ``alpha * L``.
    alpha :     int
                Hidden-unit density.

    """

    def __init__(self, a, W, alpha):
        a = np.array(a, dtype=np.complex128)
        W = np.array(W, dtype=np.complex128)
        alpha = int(alpha)

        if a.ndim != 1:
            raise DimensionError(f'Visible biases must be 1-dimensional, got {a.shape}')
        if W.shape != (alpha * len(a), len(a)):
            raise DimensionError(f'Expected weights of shape {(alpha * len(a), len(a))}, '
                                 f'got {W.shape}')

        # Read-only so that sampling phases can share the state safely
        a.flags.writeable = False
        W.flags.writeable = False
        self._a = a
        self._W = W
        self._alpha = alpha

    @property
    def a(self):
        return self._a

    @property
    def W(self):
        return self._W

    @property
    def alpha(self):
        return self._alpha

    @property
    def n_visible(self):
        return len(self._a)

    @property
    def n_hidden(self):
        return self._W.shape[0]

    @property
    def n_params(self):
        """``L + alpha * L**2``."""
        return self._a.size + self._W.size

    @property
    def parameters(self):
        """Flattened parameter vector (a copy)."""
        return np.concatenate([self._a, self._W.ravel()])

    def __str__(self):
        return (f'<RbmState(L={self.n_visible}, alpha={self.alpha}, '
                f'parameters={self.n_params})>')

    def __repr__(self):
        return self.__str__()

    def __eq__(self, other):
        if type(other) is not type(self):
            return False
        return (self.alpha == other.alpha
                and np.array_equal(self.a, other.a)
                and np.array_equal(self.W, other.W))

    def copy(self):
        """Return copy."""
        return copy.deepcopy(self)

    def with_parameters(self, theta):
        """Return new state from a flattened parameter vector."""
        theta = np.asarray(theta, dtype=np.complex128)
        if theta.shape != (self.n_params, ):
            raise DimensionError(f'Expected {self.n_params} parameters, got {theta.shape}')
        L = self.n_visible
        return type(self)(theta[:L], theta[L:].reshape(self.n_hidden, L), self.alpha)

    def as_dict(self):
        """Return JSON-serialisable dictionary."""
        return {'L': self.n_visible,
                'alpha': self.alpha,
                'theta': to_complex_pairs(self.parameters)}

    @classmethod
    def from_dict(cls, d):
        """Generate state from a dictionary as made by :meth:`as_dict`."""
        L, alpha = int(d['L']), int(d['alpha'])
        theta = from_complex_pairs(d['theta'])
        if len(theta) != L + alpha * L ** 2:
            raise DimensionError(f'Checkpoint holds {len(theta)} parameters, '
                                 f'expected {L + alpha * L ** 2}')
        return cls(theta[:L], theta[L:].reshape(alpha * L, L), alpha)

    def to_json(self, pretty=False):
        return json.dumps(self.as_dict(), indent=4 if pretty else None)

    def to_file(self, fp):
        """Save checkpoint to file."""
        with open(fp, 'w') as f:
            f.write(self.to_json(pretty=True))
        logger.info(f'Checkpoint written to {fp}')

    @classmethod
    def from_file(cls, fp):
        """Load checkpoint from file."""
        with open(fp, 'r') as f:
            return cls.from_dict(json.load(f))


@dataclass
class ActivationCache:
    """Cached hidden activations for one configuration.

    Attributes
    ----------
    theta_vec :     (M, ) array of complex
                    ``W @ x``.
    bias_dot :      complex
                    ``a . x``.
    config :        (L, ) int8 array
                    The configuration these values belong to.

    """

    theta_vec: np.ndarray
    bias_dot: complex
    config: np.ndarray

    @classmethod
    def from_state(cls, s, x):
        """Compute the cache for ``x`` from scratch."""
        x = as_configuration(x, s.n_visible).copy()
        return cls(theta_vec=s.W @ x, bias_dot=complex(s.a @ x), config=x)

    def copy(self):
        return type(self)(self.theta_vec.copy(), self.bias_dot, self.config.copy())

    def drift(self, s):
        """Largest deviation from a from-scratch recomputation."""
        fresh = self.from_state(s, self.config)
        return max(np.abs(fresh.theta_vec - self.theta_vec).max(initial=0),
                   abs(fresh.bias_dot - self.bias_dot))


def init_parameters(L, alpha, seed=None, scale=0.01):
    """Initialise an RBM close to the uniform superposition.

    Visible biases are zero; real and imaginary parts of every weight are
    drawn independently from ``N(0, scale**2)``.

    Parameters
    ----------
    L :         int
                Number of visible spins.
    alpha :     int
                Hidden-unit density (``M = alpha * L``).
    seed :      int, optional
    scale :     float
                Standard deviation. ``0`` gives the uniform state.

    Returns
    -------
    RbmState

    """
    if L < 1 or alpha < 1:
        raise ValueError(f'L and alpha must be >= 1, got L={L}, alpha={alpha}')
    if scale < 0:
        raise ValueError(f'scale must be non-negative, got {scale}')

    rng = np.random.default_rng(seed)
    shape = (alpha * L, L)
    W = rng.normal(0, scale, size=shape) + 1j * rng.normal(0, scale, size=shape)
    return RbmState(np.zeros(L, dtype=np.complex128), W, alpha)


def log_amplitude(s, x):
    """``ln psi(x) = a.x + sum_j ln(2 cosh(theta_j))``.

    Parameters
    ----------
    s :         RbmState
    x :         list-like
                Spin configuration.

    Returns
    -------
    complex

    """
    x = as_configuration(x, s.n_visible)
    return complex(s.a @ x + logcosh(s.W @ x).sum())


def log_amplitudes(s, configs):
    """Vectorised :func:`log_amplitude` over ``(N, L)`` configurations."""
    configs = np.asarray(configs, dtype=float)
    return configs @ s.a + logcosh(configs @ s.W.T).sum(axis=1)


def log_derivatives(s, cache, indices=None):
    """Log-derivatives ``O_k = d ln psi / d theta_k`` for the cached config.

    Parameters
    ----------
    s :         RbmState
    cache :     ActivationCache
    indices :   array of int, optional
                Restrict to these flattened parameter indices.

    Returns
    -------
    array of complex
                ``O_{a_i} = x_i`` and ``O_{W_ji} = x_i tanh(theta_j)``.

    """
    x = cache.config
    if indices is None:
        return np.concatenate([x.astype(np.complex128),
                               np.outer(np.tanh(cache.theta_vec), x).ravel()])
    return log_derivatives_batch(s, x[None, :], indices,
                                 thetas=cache.theta_vec[None, :])[0]


def log_derivatives_batch(s, configs, indices=None, thetas=None):
    """Log-derivatives for ``(N, L)`` configurations.

    Only the requested columns are materialised, so restricting to a
    parameter block never builds the full ``(N, L + alpha L^2)`` matrix.

    Parameters
    ----------
    s :         RbmState
    configs :   (N, L) array
    indices :   array of int, optional
                Flattened parameter indices; defaults to all.
    thetas :    (N, M) array of complex, optional
                Precomputed ``configs @ W.T``.

    Returns
    -------
    (N, K) array of complex

    """
    configs = np.asarray(configs, dtype=float)
    L = s.n_visible
    if indices is None:
        indices = np.arange(s.n_params)
    indices = np.asarray(indices, dtype=np.intp)
    if thetas is None:
        thetas = configs @ s.W.T

    out = np.empty((len(configs), len(indices)), dtype=np.complex128)
    is_bias = indices < L
    out[:, is_bias] = configs[:, indices[is_bias]]

    w_idx = indices[~is_bias] - L
    j, i = np.divmod(w_idx, L)
    out[:, ~is_bias] = np.tanh(thetas[:, j]) * configs[:, i]
    return out


def _log_ratio(s, cache, flip_site):
    xi = cache.config[flip_site]
    new_theta = cache.theta_vec - 2.0 * s.W[:, flip_site] * xi
    return (-2.0 * s.a[flip_site] * xi
            + (logcosh(new_theta) - logcosh(cache.theta_vec)).sum())


def amplitude_ratio(s, cache, flip_site):
    """``psi(x') / psi(x)`` where ``x'`` flips ``flip_site``; O(M).

    Parameters
    ----------
    s :         RbmState
    cache :     ActivationCache
    flip_site : int

    Returns
    -------
    complex

    """
    if not 0 <= flip_site < s.n_visible:
        raise IndexError(f'Flip site {flip_site} out of range for L={s.n_visible}')
    return complex(np.exp(_log_ratio(s, cache, flip_site)))


def log_amplitude_ratios(s, configs, thetas=None):
    """``ln(psi(x^(i)) / psi(x))`` for every sample and every single flip.

    Parameters
    ----------
    s :         RbmState
    configs :   (N, L) array
    thetas :    (N, M) array of complex, optional

    Returns
    -------
    (N, L) array of complex

    """
    configs = np.asarray(configs, dtype=float)
    if thetas is None:
        thetas = configs @ s.W.T
    N, L = configs.shape
    WT = s.W.T

    out = np.empty((N, L), dtype=np.complex128)
    per_sample = max(1, L * s.n_hidden)
    for sl in chunks(N, _RATIO_CHUNK_ENTRIES // per_sample):
        x = configs[sl]
        th = thetas[sl]
        new = th[:, None, :] - 2.0 * WT[None, :, :] * x[:, :, None]
        out[sl] = (-2.0 * s.a[None, :] * x
                   + (logcosh(new) - logcosh(th)[:, None, :]).sum(axis=2))
    return out


def apply_flip(cache, s, flip_site):
    """Flip one spin and update the cache in place.

    Parameters
    ----------
    cache :     ActivationCache
    s :         RbmState
    flip_site : int

    Returns
    -------
    ActivationCache
                The same (mutated) cache.

    """
    xi = cache.config[flip_site]
    cache.theta_vec = cache.theta_vec - 2.0 * s.W[:, flip_site] * xi
    cache.bias_dot = cache.bias_dot - 2.0 * s.a[flip_site] * xi
    cache.config[flip_site] = -xi
    return cache
