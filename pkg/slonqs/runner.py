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
"""Multi-trial orchestration, configuration files and reports.

Config files are flat ``section.key = value`` lines (TOML dotted keys)::

    model.L = 32
    model.J = 1
    model.h_x = 0.5
    model.h_z = 0.5
    optimizer.s = 2

Everything not given falls back to the defaults below.
"""

import concurrent.futures
import json
import logging
import os

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from tqdm.auto import tqdm

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import (ConfigurationError, RunError, GeometryError, BlockError,
                     ScheduleError)
from .estimator import correlators, correlator_error
from .model import TimHamiltonian, build_lattice
from .optimizer import SrConfig, LearningRateSchedule, run_optimization
from .oracle import EdResult, ed_correlators
from .presets import PRESETS
from .sampler import SamplerConfig, sample_configurations
from .trace import OptimizationTrace, relative_error
from .utils import as_extents, derived_seed

__all__ = ['RunConfig', 'TrialResults', 'load_config', 'run_trials',
           'emit_report', 'check_variational_bound', 'resolve_workers']

logger = logging.getLogger(__name__)

# Environment variable selecting the number of worker processes
WORKERS_ENV = 'SLONQS_WORKERS'

DEFAULTS = {
    'model.dimensionality': None,
    'model.extents': None,
    'model.J': 1.0,
    'model.h_x': 0.5,
    'model.h_z': 0.5,
    'model.preset': None,
    'ansatz.alpha': 5,
    'ansatz.init_scale': 0.01,
    'sampler.n_samples': 10_000,
    'sampler.n_thermal': 100,
    'sampler.stride': None,
    'sampler.n_chains': 1,
    'optimizer.mode': None,
    'optimizer.s': None,
    'optimizer.regularization': 1e-3,
    'optimizer.gamma_0': 0.1,
    'optimizer.gamma_f': 0.0125,
    'optimizer.decay_factor': 0.5,
    'optimizer.decay_period': 2,
    'optimizer.sweeps': 10,
    'optimizer.time_budget': None,
    'run.trials': 20,
    'run.seed': 0,
    'run.output_dir': 'results',
    'run.workers': None,
}

# Short names accepted for the most common fields
ALIASES = {
    'L': 'model.extents',
    'model.L': 'model.extents',
    'J': 'model.J',
    'h_x': 'model.h_x',
    'h_z': 'model.h_z',
    'preset': 'model.preset',
    's': 'optimizer.s',
    'mode': 'optimizer.mode',
    'alpha': 'ansatz.alpha',
    'trials': 'run.trials',
    'seed': 'run.seed',
}


@dataclass(frozen=True)
class RunConfig:
    """Complete description of a multi-trial run.

    Parameters
    ----------
    extents :       tuple of int
                    ``(L, )`` or ``(n_rows, n_cols)``.
    J, h_x, h_z :   float
                    Hamiltonian parameters.
    sr :            SrConfig
                    Ansatz, sampler and optimizer settings.
    trials :        int
                    Independent optimizations; the best one is kept.
    seed :          int
                    Trial ``k`` uses seed ``seed + k``.
    output_dir :    str
    workers :       int, optional
                    Worker processes; see :func:`resolve_workers`.

    """

    extents: tuple
    J: float = 1.0
    h_x: float = 0.5
    h_z: float = 0.5
    sr: SrConfig = field(default_factory=SrConfig)
    trials: int = 20
    seed: int = 0
    output_dir: str = 'results'
    workers: Optional[int] = None

    @property
    def n_sites(self):
        return int(np.prod(self.extents))

    def hamiltonian(self):
        return TimHamiltonian(build_lattice(len(self.extents), self.extents),
                              J=self.J, h_x=self.h_x, h_z=self.h_z)

    def validate(self):
        """Check every field, raising :class:`ConfigurationError`."""
        try:
            self.hamiltonian()
        except GeometryError as e:
            raise ConfigurationError('model.extents', str(e))
        if self.trials < 1:
            raise ConfigurationError('run.trials', f'must be >= 1, got {self.trials}')
        if self.workers is not None and self.workers < 1:
            raise ConfigurationError('run.workers', f'must be >= 1, got {self.workers}')

        sr = self.sr
        if sr.mode not in ('global', 'slo'):
            raise ConfigurationError('optimizer.mode', f'expected "global" or "slo", got "{sr.mode}"')
        try:
            sr.schedule(self.hamiltonian().lattice)
        except (BlockError, ScheduleError, TypeError) as e:
            raise ConfigurationError('optimizer.s', f'invalid block: {e}')

        checks = [('ansatz.alpha', sr.alpha >= 1),
                  ('ansatz.init_scale', sr.init_scale >= 0),
                  ('optimizer.regularization', sr.regularization >= 0),
                  ('optimizer.sweeps', sr.n_sweeps >= 1),
                  ('optimizer.gamma_0', sr.learning_rate.gamma_0 > 0),
                  ('optimizer.gamma_f', sr.learning_rate.gamma_f > 0),
                  ('optimizer.decay_factor', 0 < sr.learning_rate.factor <= 1),
                  ('optimizer.decay_period', sr.learning_rate.period >= 1),
                  ('optimizer.time_budget', sr.time_budget is None or sr.time_budget > 0),
                  ('sampler.n_samples', sr.sampler.n_samples >= 1),
                  ('sampler.n_thermal', sr.sampler.n_thermal >= 1),
                  ('sampler.stride', sr.sampler.stride is None or sr.sampler.stride >= 1),
                  ('sampler.n_chains', 1 <= sr.sampler.n_chains <= sr.sampler.n_samples)]
        for name, ok in checks:
            if not ok:
                raise ConfigurationError(name, f'value {self.as_dict()[name]!r} out of range')
        return self

    def as_dict(self):
        """Flat dictionary with dotted keys (the config file layout)."""
        sr, lr, smp = self.sr, self.sr.learning_rate, self.sr.sampler
        return {'model.dimensionality': len(self.extents),
                'model.extents': list(self.extents),
                'model.J': self.J,
                'model.h_x': self.h_x,
                'model.h_z': self.h_z,
                'ansatz.alpha': sr.alpha,
                'ansatz.init_scale': sr.init_scale,
                'sampler.n_samples': smp.n_samples,
                'sampler.n_thermal': smp.n_thermal,
                'sampler.stride': smp.stride,
                'sampler.n_chains': smp.n_chains,
                'optimizer.mode': sr.mode,
                'optimizer.s': (list(sr.block_size) if isinstance(sr.block_size, tuple)
                                else sr.block_size),
                'optimizer.regularization': sr.regularization,
                'optimizer.gamma_0': lr.gamma_0,
                'optimizer.gamma_f': lr.gamma_f,
                'optimizer.decay_factor': lr.factor,
                'optimizer.decay_period': lr.period,
                'optimizer.sweeps': sr.n_sweeps,
                'optimizer.time_budget': sr.time_budget,
                'run.trials': self.trials,
                'run.seed': self.seed,
                'run.output_dir': self.output_dir,
                'run.workers': self.workers}

    @classmethod
    def from_dict(cls, d):
        """Build and validate a config from a (flat or nested) dictionary.

        Omitted fields take the defaults in ``DEFAULTS``.
        """
        flat = {}
        for key, value in _flatten(d).items():
            key = ALIASES.get(key, key)
            if key not in DEFAULTS:
                raise ConfigurationError(key, 'unknown field')
            flat[key] = value
        values = dict(DEFAULTS)
        values.update(flat)

        preset = values['model.preset']
        if preset is not None:
            if preset not in PRESETS:
                raise ConfigurationError('model.preset', f'unknown preset "{preset}"')
            for k, v in PRESETS[preset].items():
                if f'model.{k}' not in flat:
                    values[f'model.{k}'] = v

        if values['model.extents'] is None:
            raise ConfigurationError('model.extents', 'lattice size is required')
        extents = _convert('model.extents', values['model.extents'], as_extents)
        dim = values['model.dimensionality']
        if dim is not None and int(dim) != len(extents):
            raise ConfigurationError('model.dimensionality',
                                     f'{dim} does not match extents {list(extents)}')

        block = values['optimizer.s']
        if block is not None:
            block = _convert('optimizer.s', block, as_extents)
            block = block[0] if len(block) == 1 else block
        mode = values['optimizer.mode'] or ('global' if block is None else 'slo')

        sampler = SamplerConfig(
            n_samples=_convert('sampler.n_samples', values['sampler.n_samples'], int),
            n_thermal=_convert('sampler.n_thermal', values['sampler.n_thermal'], int),
            stride=_convert('sampler.stride', values['sampler.stride'], int, optional=True),
            n_chains=_convert('sampler.n_chains', values['sampler.n_chains'], int))
        learning_rate = LearningRateSchedule(
            gamma_0=_convert('optimizer.gamma_0', values['optimizer.gamma_0'], float),
            gamma_f=_convert('optimizer.gamma_f', values['optimizer.gamma_f'], float),
            factor=_convert('optimizer.decay_factor', values['optimizer.decay_factor'], float),
            period=_convert('optimizer.decay_period', values['optimizer.decay_period'], int))
        sr = SrConfig(
            mode=str(mode),
            block_size=block,
            regularization=_convert('optimizer.regularization', values['optimizer.regularization'], float),
            n_sweeps=_convert('optimizer.sweeps', values['optimizer.sweeps'], int),
            alpha=_convert('ansatz.alpha', values['ansatz.alpha'], int),
            init_scale=_convert('ansatz.init_scale', values['ansatz.init_scale'], float),
            sampler=sampler,
            learning_rate=learning_rate,
            time_budget=_convert('optimizer.time_budget', values['optimizer.time_budget'],
                                 float, optional=True))

        cfg = cls(extents=extents,
                  J=_convert('model.J', values['model.J'], float),
                  h_x=_convert('model.h_x', values['model.h_x'], float),
                  h_z=_convert('model.h_z', values['model.h_z'], float),
                  sr=sr,
                  trials=_convert('run.trials', values['run.trials'], int),
                  seed=_convert('run.seed', values['run.seed'], int),
                  output_dir=str(values['run.output_dir']),
                  workers=_convert('run.workers', values['run.workers'], int, optional=True))
        return cfg.validate()

    def with_overrides(self, **kwargs):
        """Return copy with top-level fields replaced (``None`` is ignored)."""
        kwargs = {k: v for k, v in kwargs.items() if v is not None}
        return replace(self, **kwargs).validate()


def _flatten(d, prefix=''):
    out = {}
    for k, v in d.items():
        key = f'{prefix}{k}'
        if isinstance(v, dict):
            out.update(_flatten(v, prefix=f'{key}.'))
        else:
            out[key] = v
    return out


def _convert(name, value, func, optional=False):
    if value is None and optional:
        return None
    try:
        return func(value)
    except (TypeError, ValueError) as e:
        raise ConfigurationError(name, f'can not interpret {value!r}: {e}')


def load_config(path):
    """Read a run configuration file.

    Parameters
    ----------
    path :      str | Path
                Flat ``section.key = value`` text file.

    Returns
    -------
    RunConfig

    """
    try:
        with open(path, 'rb') as f:
            d = tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        raise ConfigurationError(str(path), f'unable to parse: {e}')
    return RunConfig.from_dict(d)


def resolve_workers(cfg):
    """Worker count: ``$SLONQS_WORKERS`` > ``cfg.workers`` > available CPUs.

    Never more than the number of trials.
    """
    env = os.environ.get(WORKERS_ENV, '')
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigurationError(WORKERS_ENV, f'expected integer, got "{env}"')
    elif cfg.workers:
        n = cfg.workers
    else:
        n = os.cpu_count() or 1
    return max(1, min(n, cfg.trials))


@dataclass
class TrialResults:
    """Outcome of :func:`run_trials`.

    Attributes
    ----------
    best_trial :        int
    traces :            list of OptimizationTrace
                        One per trial, ordered by trial id (failed trials
                        included with their ``error`` set).
    best_state :        RbmState
    correlators :       CorrelatorReport, optional
                        Sampled from the best state (chains only).
    reference :         float, optional
                        Exact ground state energy.
    correlator_error :  dict, optional

    """

    best_trial: int
    traces: list
    best_state: object
    correlators: object = None
    reference: Optional[float] = None
    correlator_error: Optional[dict] = None

    @property
    def best_trace(self):
        return next(t for t in self.traces if t.trial == self.best_trial)

    def summary(self, cfg=None):
        ref = self.reference
        d = {'best_trial': self.best_trial,
             'best_energy': self.best_trace.final_energy,
             'reference_energy': ref,
             'trials': [t.summary(ref) for t in self.traces]}
        if ref is not None:
            d['final_epsilon'] = float(relative_error(self.best_trace.final_energy, ref))
            d['variational_violations'] = check_variational_bound(self.traces, ref)
        if self.correlator_error is not None:
            d['correlator_error'] = self.correlator_error
        if cfg is not None:
            d['config'] = cfg.as_dict()
        return d


def _run_trial(cfg, trial):
    """Run a single trial; never raises so one failure can't affect others."""
    h = cfg.hamiltonian()
    try:
        state, trace = run_optimization(h, cfg.sr, seed=cfg.seed + trial, trial=trial)
    except (ArithmeticError, ValueError, np.linalg.LinAlgError) as e:
        logger.warning(f'Trial {trial} aborted: {e}')
        trace = OptimizationTrace(trial=trial)
        trace.error = e
        return trial, None, trace
    logger.info(f'Trial {trial} finished: E={trace.final_energy:.8f}')
    return trial, state, trace


def run_trials(cfg, reference=None, reference_correlators=None, progress=False,
               write=True):
    """Run ``cfg.trials`` independent optimizations and keep the best.

    Parameters
    ----------
    cfg :       RunConfig
    reference : EdResult | float, optional
                Exact ground state (energy); enables epsilon.
    reference_correlators : CorrelatorReport, optional
                Exact correlators; computed from ``reference`` if that is
                an EdResult. Enables the correlator error.
    progress :  bool
                Show a progress bar over trials.
    write :     bool
                If True, write traces, the best checkpoint, the correlators
                and a summary to ``cfg.output_dir``.

    Returns
    -------
    TrialResults

    """
    cfg.validate()
    workers = resolve_workers(cfg)
    logger.info(f'Running {cfg.trials} trial(s) on {workers} worker(s)')

    results = {}
    if workers == 1:
        for k in tqdm(range(cfg.trials), desc='Trials', disable=not progress):
            trial, state, trace = _run_trial(cfg, k)
            results[trial] = (state, trace)
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_trial, cfg, k) for k in range(cfg.trials)]
            for fut in tqdm(concurrent.futures.as_completed(futures), total=len(futures),
                            desc='Trials', disable=not progress):
                trial, state, trace = fut.result()
                results[trial] = (state, trace)

    traces = [results[k][1] for k in sorted(results)]
    ok = [t for t in traces if t.error is None and len(t)]
    if not ok:
        raise RunError(f'All {cfg.trials} trials failed')

    best = min(ok, key=lambda t: (t.final_energy, t.trial))
    best_state = results[best.trial][0]
    logger.info(f'Best trial {best.trial}: E={best.final_energy:.8f}')

    out = TrialResults(best_trial=best.trial, traces=traces, best_state=best_state,
                       reference=getattr(reference, 'ground_energy', reference))

    if write:
        _write_traces(cfg, out)

    h = cfg.hamiltonian()
    if h.lattice.dimensionality == 1 and h.n_sites > 1:
        sampler_cfg = cfg.sr.sampler.with_seed(derived_seed(cfg.seed + best.trial, len(best)))
        # Configurations only: no local energies or log-derivatives
        configs, _ = sample_configurations(best_state, sampler_cfg)
        out.correlators = correlators(configs, h.lattice)
        if reference_correlators is None and isinstance(reference, EdResult):
            reference_correlators = ed_correlators(reference, h.lattice)
        if reference_correlators is not None:
            out.correlator_error = correlator_error(out.correlators, reference_correlators)

    if write:
        _write_results(cfg, out)

    return out


def _write_traces(cfg, res):
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)

    frames = [t.to_frame() for t in res.traces if len(t)]
    pd.concat(frames, ignore_index=True).to_csv(outdir / 'traces.csv', index=False)
    res.best_state.to_file(outdir / 'best_state.json')


def _write_results(cfg, res):
    outdir = Path(cfg.output_dir)
    if res.correlators is not None:
        res.correlators.to_frame().to_csv(outdir / 'correlators.csv', index=False)
    with open(outdir / 'summary.json', 'w') as f:
        f.write(json.dumps(res.summary(cfg), indent=4, sort_keys=True, default=str))
    logger.info(f'Results written to {outdir}')


def check_variational_bound(traces, ground_energy, n_sigma=3):
    """Find estimates significantly below the exact ground state energy.

    Parameters
    ----------
    traces :        list of OptimizationTrace
    ground_energy : float
    n_sigma :       float

    Returns
    -------
    list of (trial, iteration)
                    Iterations where ``energy + n_sigma * std_error < E_gs``.

    """
    violations = []
    for t in traces:
        for r in t.records:
            if r['energy'] + n_sigma * r['std_error'] < ground_energy:
                violations.append((t.trial, r['iteration']))
    if violations:
        logger.warning(f'{len(violations)} estimate(s) violate the variational bound')
    return violations


def emit_report(traces, reference=None, output_dir=None, correlators=None,
                reference_correlators=None):
    """Assemble report tables for plotting.

    Parameters
    ----------
    traces :                list of OptimizationTrace
    reference :             EdResult | float, optional
                            Exact ground state (energy). Without it the
                            ``epsilon`` columns are omitted.
    output_dir :            str, optional
                            If given, tables are written there as CSV.
    correlators :           CorrelatorReport, optional
    reference_correlators : CorrelatorReport, optional

    Returns
    -------
    dict of pandas.DataFrame
                ``iterations``, ``trials``, ``bands`` and (if correlators
                were given) ``correlators``.

    """
    traces = [t for t in traces if len(t)]
    if not traces:
        raise ValueError('Need at least one non-empty trace to report')
    ref = getattr(reference, 'ground_energy', reference)

    iterations = pd.concat([t.to_frame(reference=ref) for t in traces],
                           ignore_index=True)
    trials = pd.DataFrame([t.summary(ref) for t in traces])

    value_cols = ['energy'] + (['epsilon'] if ref is not None else [])
    grouped = iterations.groupby('iteration')
    bands = grouped.agg(sweep=('sweep', 'first'), n_trials=('trial', 'size'))
    for col in value_cols:
        # Lower envelope and the upper edge of the lowest 50% across trials
        bands[f'{col}_min'] = grouped[col].min()
        bands[f'{col}_p50'] = grouped[col].quantile(0.5)
    bands = bands.reset_index()

    tables = {'iterations': iterations, 'trials': trials, 'bands': bands}

    if correlators is not None:
        corr = correlators.to_frame()
        if reference_correlators is not None:
            ref_corr = reference_correlators.to_frame()
            corr['ferro_ref'] = ref_corr['ferro']
            corr['antiferro_ref'] = ref_corr['antiferro']
        tables['correlators'] = corr

    if output_dir is not None:
        outdir = Path(output_dir)
        outdir.mkdir(parents=True, exist_ok=True)
        for name, df in tables.items():
            df.to_csv(outdir / f'report_{name}.csv', index=False)
        logger.info(f'Report tables written to {outdir}')

    return tables
