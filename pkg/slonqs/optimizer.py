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
"""Stochastic reconfiguration and sequential local optimization (SLO).

SLO restricts every SR update to the parameters coupled to a contiguous
group of visible spins (a block) and sweeps that block across the lattice,
forward and then back, like a DMRG sweep. Global SR is the special case of
a single block covering the whole lattice.
"""

import logging
import time
import warnings

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
import scipy.linalg as la

from tqdm.auto import tqdm

from .ansatz import init_parameters
from .errors import BlockError, ScheduleError, NonFiniteEnergyError
from .estimator import gradient_F, covariance_S, energy_estimate
from .sampler import SamplerConfig, run_chain
from .trace import OptimizationTrace
from .utils import as_extents, derived_seed

__all__ = ['ParameterBlock', 'SweepSchedule', 'LearningRateSchedule',
           'SrConfig', 'block_index_set', 'build_sweep_schedule_1d',
           'build_sweep_schedule_2d', 'build_sweep_schedule', 'sr_update',
           'run_optimization']

logger = logging.getLogger(__name__)

# Cutoff for the pseudo-inverse fallback of the SR solve
PINV_CUTOFF = 1e-10

# Accepted relative residual of a direct solve
SOLVE_RTOL = 1e-8


@dataclass(frozen=True)
class ParameterBlock:
    """Parameters coupled to a contiguous group of visible sites.

    Attributes
    ----------
    p :         int | (int, int)
                Leftmost site (1D) or lower-left ``(row, col)`` (2D).
    s :         int | (int, int)
                Block extent.
    sites :     tuple of int
                Sites inside the block.
    indices :   (K, ) int array
                Sorted flattened parameter indices; ``K = n_sites*(alpha L + 1)``.

    """

    p: Union[int, tuple]
    s: Union[int, tuple]
    sites: tuple
    indices: np.ndarray = field(repr=False, compare=False)

    @property
    def size(self):
        return len(self.indices)

    @property
    def origin(self):
        """Site index of the block's first site."""
        return self.sites[0]

    def __str__(self):
        return f'<ParameterBlock(p={self.p}, s={self.s}, parameters={self.size})>'


def block_index_set(p, s, L, alpha, extents=None):
    """Resolve the parameter indices of the block starting at ``p``.

    Parameters
    ----------
    p :         int | (int, int)
                Block origin.
    s :         int | (int, int)
                Block extent.
    L :         int
                Number of sites.
    alpha :     int
                Hidden-unit density.
    extents :   tuple of int, optional
                Lattice extents; defaults to a chain of ``L`` sites.

    Returns
    -------
    ParameterBlock

    """
    extents = as_extents(extents if extents is not None else L)
    if int(np.prod(extents)) != L:
        raise BlockError(f'Extents {extents} do not match L={L}')

    p_t, s_t = as_extents(p), as_extents(s)
    if len(p_t) != len(extents) or len(s_t) != len(extents):
        raise BlockError(f'Block p={p}, s={s} does not match a {len(extents)}D lattice')
    for pd_, sd, ed in zip(p_t, s_t, extents):
        if sd < 1:
            raise BlockError(f'Block extent must be positive, got s={s}')
        if pd_ < 0 or pd_ + sd > ed:
            raise BlockError(f'Block p={p}, s={s} exceeds lattice extents {extents}')

    if len(extents) == 1:
        sites = tuple(range(p_t[0], p_t[0] + s_t[0]))
    else:
        n_cols = extents[1]
        sites = tuple(r * n_cols + c
                      for r in range(p_t[0], p_t[0] + s_t[0])
                      for c in range(p_t[1], p_t[1] + s_t[1]))

    site_arr = np.asarray(sites, dtype=np.intp)
    M = alpha * L
    w_idx = (L + np.arange(M)[:, None] * L + site_arr[None, :]).ravel()
    indices = np.sort(np.concatenate([site_arr, w_idx]))

    return ParameterBlock(p=p if len(extents) > 1 else p_t[0],
                          s=s if len(extents) > 1 else s_t[0],
                          sites=sites,
                          indices=indices)


@dataclass(frozen=True)
class SweepSchedule:
    """Block positions visited in one sweep.

    Attributes
    ----------
    positions : tuple
                Block origins, forward then backward.
    s :         int | (int, int)
                Block extent.
    extents :   tuple of int
                Lattice extents.

    """

    positions: tuple
    s: Union[int, tuple]
    extents: tuple

    @property
    def n_s(self):
        return len(self.positions)

    def __len__(self):
        return self.n_s

    def __iter__(self):
        return iter(self.positions)

    def blocks(self, alpha):
        """Resolve every position into a :class:`ParameterBlock`."""
        L = int(np.prod(self.extents))
        return [block_index_set(p, self.s, L, alpha, extents=self.extents)
                for p in self.positions]


def _axis_positions(extent, s):
    t = max(1, s // 2)
    if (extent - s) % t:
        raise ScheduleError(f'Block size {s} with stride {t} does not tile '
                            f'{extent} sites')
    return list(range(0, extent - s + 1, t))


def _forward_backward(forward):
    # Backward pass retraces the interior, endpoints are not revisited
    return tuple(forward) + tuple(forward[::-1][1:-1])


def build_sweep_schedule_1d(L, s):
    """DMRG-like sweep over a chain with half-block overlap.

    Parameters
    ----------
    L :         int
                Chain length.
    s :         int
                Block size; ``s == L`` gives global SR.

    Returns
    -------
    SweepSchedule

    """
    L, s = int(L), int(s)
    if s == L:
        return SweepSchedule(positions=(0, ), s=s, extents=(L, ))
    if s < 2 or s > L:
        raise BlockError(f'Block size must satisfy 2 <= s <= L={L}, got s={s}')
    return SweepSchedule(positions=_forward_backward(_axis_positions(L, s)),
                         s=s, extents=(L, ))


def build_sweep_schedule_2d(extents, s_pair):
    """Raster sweep over a grid, row-major forward then reversed.

    Parameters
    ----------
    extents :   (int, int)
                ``(n_rows, n_cols)``.
    s_pair :    int | (int, int)
                Block extent; an int means a square block.

    Returns
    -------
    SweepSchedule

    """
    extents = as_extents(extents)
    s_pair = as_extents(s_pair)
    if len(s_pair) == 1:
        s_pair = s_pair * 2
    if len(extents) != 2:
        raise BlockError(f'Expected 2D extents, got {extents}')
    for sd, ed in zip(s_pair, extents):
        if sd < 1 or sd > ed:
            raise BlockError(f'Block {s_pair} does not fit a {extents} grid')

    rows = [0] if s_pair[0] == extents[0] else _axis_positions(extents[0], s_pair[0])
    cols = [0] if s_pair[1] == extents[1] else _axis_positions(extents[1], s_pair[1])
    forward = [(r, c) for r in rows for c in cols]
    return SweepSchedule(positions=_forward_backward(forward),
                         s=s_pair, extents=extents)


def build_sweep_schedule(extents, s):
    """Dispatch to the 1D or 2D schedule builder."""
    extents = as_extents(extents)
    if len(extents) == 1:
        return build_sweep_schedule_1d(extents[0], as_extents(s)[0])
    return build_sweep_schedule_2d(extents, s)


@dataclass(frozen=True)
class LearningRateSchedule:
    """Step-wise decaying learning rate ``gamma(sweep)``.

    ``gamma = max(gamma_f, gamma_0 * factor ** (sweep // period))``
    """

    gamma_0: float = 0.1
    gamma_f: float = 0.0125
    factor: float = 0.5
    period: int = 2

    def __call__(self, sweep):
        return max(self.gamma_f, self.gamma_0 * self.factor ** (int(sweep) // self.period))

    def validate(self):
        if self.gamma_0 <= 0 or self.gamma_f <= 0:
            raise ValueError('Learning rates must be positive')
        if not 0 < self.factor <= 1:
            raise ValueError(f'Decay factor must be in (0, 1], got {self.factor}')
        if self.period < 1:
            raise ValueError(f'Decay period must be >= 1, got {self.period}')
        return self


@dataclass(frozen=True)
class SrConfig:
    """Settings of one optimization run.

    Parameters
    ----------
    mode :              "global" | "slo"
    block_size :        int | (int, int), optional
                        Block extent for SLO. Ignored in global mode.
    regularization :    float
                        Diagonal shift added to ``S``.
    n_sweeps :          int
    alpha :             int
                        Hidden-unit density of the ansatz.
    init_scale :        float
                        Standard deviation of the initial weights.
    sampler :           SamplerConfig
    learning_rate :     LearningRateSchedule
    time_budget :       float, optional
                        Stop after the first iteration exceeding this many
                        seconds.

    """

    mode: str = 'global'
    block_size: Optional[Union[int, tuple]] = None
    regularization: float = 1e-3
    n_sweeps: int = 10
    alpha: int = 5
    init_scale: float = 0.01
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    learning_rate: LearningRateSchedule = field(default_factory=LearningRateSchedule)
    time_budget: Optional[float] = None

    def validate(self):
        if self.mode not in ('global', 'slo'):
            raise ValueError(f'mode must be "global" or "slo", got "{self.mode}"')
        if self.mode == 'slo' and self.block_size is None:
            raise BlockError('SLO mode requires a block size')
        if self.regularization < 0:
            raise ValueError(f'Regularization must be >= 0, got {self.regularization}')
        if self.n_sweeps < 1:
            raise ValueError(f'Need at least one sweep, got {self.n_sweeps}')
        if self.alpha < 1:
            raise ValueError(f'alpha must be >= 1, got {self.alpha}')
        self.sampler.validate()
        self.learning_rate.validate()
        return self

    def schedule(self, lattice):
        """Sweep schedule for ``lattice`` (a single full block in global mode)."""
        s = lattice.extents if self.mode == 'global' else self.block_size
        return build_sweep_schedule(lattice.extents, s)


def sr_update(state, block, batch, gamma, regularization=1e-3):
    """One stochastic reconfiguration step restricted to ``block``.

    Solves ``(S + lambda I) delta = F`` and sets
    ``theta_block <- theta_block - gamma * delta``. Parameters outside the
    block are left untouched.

    Parameters
    ----------
    state :             RbmState
    block :             ParameterBlock
    batch :             SampleBatch
                        Must carry log-derivatives for ``block.indices``.
    gamma :             float
    regularization :    float

    Returns
    -------
    RbmState

    """
    if not np.array_equal(batch.indices, block.indices):
        raise BlockError(f'Sample batch parameters do not match {block}')

    F = gradient_F(batch)
    A = covariance_S(batch)
    A[np.diag_indices_from(A)] += regularization

    delta = None
    try:
        with warnings.catch_warnings():
            warnings.simplefilter('ignore', la.LinAlgWarning)
            delta = la.solve(A, F, assume_a='her')
        residual = np.linalg.norm(A @ delta - F)
        if not np.isfinite(residual) or residual > SOLVE_RTOL * max(np.linalg.norm(F), 1e-300):
            logger.debug(f'Direct SR solve residual {residual:.2e} too large')
            delta = None
    except la.LinAlgError:
        pass

    if delta is None:
        logger.warning(f'SR matrix for {block} is singular, falling back to '
                       'pseudo-inverse')
        delta = la.pinvh(A, atol=PINV_CUTOFF) @ F

    theta = state.parameters
    theta[block.indices] -= gamma * delta
    return state.with_parameters(theta)


def run_optimization(h, cfg, seed, trial=0, initial_state=None, progress=False):
    """Optimize an RBM for ``h`` by (block-restricted) SR sweeps.

    Every block update draws a fresh sample batch. Sampling seeds are
    derived from ``(seed, iteration)`` so that the run is reproducible.

    Parameters
    ----------
    h :             TimHamiltonian
    cfg :           SrConfig
    seed :          int
    trial :         int
                    Trial id stored in the trace.
    initial_state : RbmState, optional
                    Start here instead of a fresh initialization.
    progress :      bool
                    Show a progress bar over sweeps.

    Returns
    -------
    state :         RbmState
    trace :         OptimizationTrace

    """
    cfg.validate()
    L = h.n_sites
    if initial_state is None:
        state = init_parameters(L, cfg.alpha, seed=seed, scale=cfg.init_scale)
    else:
        state = initial_state

    schedule = cfg.schedule(h.lattice)
    blocks = schedule.blocks(state.alpha)
    trace = OptimizationTrace(trial=trial)
    logger.info(f'Trial {trial}: {cfg.mode} optimization of {h} with '
                f'{schedule.n_s} block updates per sweep')

    start = time.perf_counter()
    iteration = 0
    for sweep in tqdm(range(cfg.n_sweeps), desc=f'Trial {trial}',
                      disable=not progress, leave=False):
        gamma = cfg.learning_rate(sweep)
        for block in blocks:
            sampler_cfg = cfg.sampler.with_seed(derived_seed(seed, iteration))
            batch = run_chain(state, sampler_cfg, h, block)
            energy = energy_estimate(batch)
            if not np.isfinite(energy.mean):
                raise NonFiniteEnergyError(f'Trial {trial}: non-finite energy at '
                                           f'sweep {sweep}, block {block.p}')

            state = sr_update(state, block, batch, gamma, cfg.regularization)
            t_r = time.perf_counter() - start
            trace.append(sweep=sweep, position=block.origin, energy=energy,
                         gamma=gamma, t_r=t_r, acceptance=batch.acceptance)
            logger.debug(f'Trial {trial} sweep {sweep} block {block.p}: '
                         f'E={energy.real:.8f} +/- {energy.std_error:.2e} '
                         f'(imag {np.imag(energy.mean):.1e})')
            iteration += 1

            if cfg.time_budget is not None and t_r > cfg.time_budget:
                logger.info(f'Trial {trial}: time budget of {cfg.time_budget}s '
                            f'exhausted after {iteration} iterations')
                return state, trace

    return state, trace
