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

"""Command line interface: ``slonqs run|ed|report``."""

import logging

from pathlib import Path

import click
import pandas as pd

from .errors import CapabilityError, ConfigurationError
from .estimator import CorrelatorReport
from .oracle import FixtureStore, ed_ground_state
from .runner import load_config, run_trials, emit_report
from .trace import OptimizationTrace

logger = logging.getLogger(__name__)

DEFAULT_FIXTURES = 'ed_fixtures.json'


def _reference(h, store, compute):
    """Exact reference for ``h`` from ``store``, computed by ED if allowed.

    Returns the EdResult when freshly computed, the stored energy otherwise
    (``None`` if neither is available).
    """
    if h in store:
        logger.info(f'Using stored reference E_gs={store.ground_energy(h):.10f}')
        return store.ground_energy(h)
    if not compute:
        return None
    try:
        result = ed_ground_state(h)
    except CapabilityError as e:
        logger.info(f'No exact reference: {e}')
        return None
    store.add(h, result)
    store.to_file()
    return result


@click.group()
@click.option('-v', '--verbose', count=True,
              help='Increase verbosity (-v for INFO, -vv for DEBUG).')
def cli(verbose):
    """Ground states of tilted Ising models with RBM quantum states."""
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbose, logging.DEBUG)
    logging.basicConfig(level=level,
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')


@cli.command()
@click.argument('config', type=click.Path(exists=True, dir_okay=False, path_type=str))
@click.option('-o', '--output-dir', type=click.Path(file_okay=False, path_type=str),
              help='Overrides `run.output_dir`.')
@click.option('--trials', type=click.IntRange(min=1), help='Overrides `run.trials`.')
@click.option('--seed', type=click.IntRange(min=0), help='Overrides `run.seed`.')
@click.option('--fixtures', type=click.Path(dir_okay=False, path_type=str),
              default=DEFAULT_FIXTURES, show_default=True,
              help='JSON file with exact reference energies.')
@click.option('--ed/--no-ed', default=True, show_default=True,
              help='Compute a missing reference by exact diagonalization.')
@click.option('--progress/--no-progress', default=False, show_default=True,
              help='Show a progress bar over trials.')
def run(config, output_dir, trials, seed, fixtures, ed, progress):
    """Optimize the model described in CONFIG (best of several trials)."""
    try:
        cfg = load_config(config).with_overrides(output_dir=output_dir,
                                                 trials=trials, seed=seed)
    except ConfigurationError as e:
        raise click.BadParameter(str(e), param_hint='CONFIG')

    h = cfg.hamiltonian()
    store = FixtureStore(fixtures)
    reference = _reference(h, store, compute=ed)
    ref_corr = store.correlators(h)
    res = run_trials(cfg, reference=reference, reference_correlators=ref_corr,
                     progress=progress)
    reference = res.reference

    emit_report(res.traces, reference=reference, output_dir=cfg.output_dir,
                correlators=res.correlators, reference_correlators=ref_corr)

    click.echo(f'Best trial: {res.best_trial}')
    click.echo(f'Energy:     {res.best_trace.final_energy:.10f}')
    if reference is not None:
        eps = abs(res.best_trace.final_energy - reference) / abs(reference)
        click.echo(f'Reference:  {reference:.10f} (epsilon={eps:.3e})')
    if res.correlator_error is not None:
        click.echo(f'Correlator error at d=L-1: {res.correlator_error}')
    click.echo(f'Results in {cfg.output_dir}')


@cli.command()
@click.argument('config', type=click.Path(exists=True, dir_okay=False, path_type=str))
@click.option('--fixtures', type=click.Path(dir_okay=False, path_type=str),
              default=DEFAULT_FIXTURES, show_default=True,
              help='JSON file to store the reference in.')
def ed(config, fixtures):
    """Compute and store the exact ground state of the model in CONFIG."""
    try:
        h = load_config(config).hamiltonian()
    except ConfigurationError as e:
        raise click.BadParameter(str(e), param_hint='CONFIG')

    try:
        result = ed_ground_state(h)
    except CapabilityError as e:
        raise click.ClickException(str(e))

    store = FixtureStore(fixtures)
    store.add(h, result)
    store.to_file()
    click.echo(f'E_gs = {result.ground_energy:.12f} (gap {result.gap:.6f})')


@cli.command()
@click.argument('output_dir', type=click.Path(exists=True, file_okay=False, path_type=str))
@click.option('--fixtures', type=click.Path(dir_okay=False, path_type=str),
              default=DEFAULT_FIXTURES, show_default=True,
              help='JSON file with exact reference energies.')
@click.option('-c', '--config', type=click.Path(exists=True, dir_okay=False, path_type=str),
              help='Config of the run; needed to look up the reference.')
def report(output_dir, fixtures, config):
    """Regenerate report tables from the traces stored in OUTPUT_DIR."""
    outdir = Path(output_dir)
    fp = outdir / 'traces.csv'
    if not fp.is_file():
        raise click.ClickException(f'No traces found in {outdir}')
    traces = OptimizationTrace.from_frame(pd.read_csv(fp))

    reference = ref_corr = None
    if config:
        try:
            h = load_config(config).hamiltonian()
        except ConfigurationError as e:
            raise click.BadParameter(str(e), param_hint='--config')
        store = FixtureStore(fixtures)
        reference = store.ground_energy(h)
        ref_corr = store.correlators(h)

    corr = None
    if (outdir / 'correlators.csv').is_file():
        corr = CorrelatorReport.from_pairs(pd.read_csv(outdir / 'correlators.csv')['pair'].values)

    tables = emit_report(traces, reference=reference, output_dir=outdir,
                         correlators=corr, reference_correlators=ref_corr)
    click.echo(f'Wrote {", ".join(tables)} tables to {outdir}')


if __name__ == '__main__':
    cli()
