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

import numpy as np
import pandas as pd

__all__ = ['OptimizationTrace', 'relative_error']

# Columns whose values depend on the machine rather than the seed
TIMING_COLUMNS = ['t_r']


def relative_error(energy, reference):
    """``|E - E_gs| / |E_gs|``."""
    return np.abs(np.asarray(energy) - reference) / abs(reference)


class OptimizationTrace:
    """Per-iteration record of one optimization run.

    Parameters
    ----------
    trial :     int
                Trial id written into every record.

    """

    COLUMNS = ['trial', 'sweep', 'position', 'iteration', 'energy',
               'energy_imag', 'variance', 'std_error', 'gamma', 'acceptance',
               't_r']

    def __init__(self, trial=0, records=None):
        self.trial = int(trial)
        self._records = list(records) if records else []
        self.error = None

    def __len__(self):
        return len(self._records)

    def __str__(self):
        if not len(self):
            return f'<OptimizationTrace(trial={self.trial}, iterations=0)>'
        return (f'<OptimizationTrace(trial={self.trial}, iterations={len(self)}, '
                f'final energy={self.final_energy:.8f})>')

    def __repr__(self):
        return self.__str__()

    def append(self, sweep, position, energy, gamma, t_r, acceptance=np.nan):
        """Record one block update.

        Parameters
        ----------
        sweep :     int
        position :  int
                    Site index of the block's first (lower-left) site.
        energy :    EnergyEstimate
        gamma :     float
        t_r :       float
                    Seconds since the start of the run.
        acceptance : float

        """
        self._records.append({'trial': self.trial,
                              'sweep': int(sweep),
                              'position': int(position),
                              'iteration': len(self._records),
                              'energy': energy.real,
                              'energy_imag': float(np.imag(energy.mean)),
                              'variance': energy.variance,
                              'std_error': energy.std_error,
                              'gamma': float(gamma),
                              'acceptance': float(acceptance),
                              't_r': float(t_r)})

    @property
    def records(self):
        return list(self._records)

    @property
    def final_energy(self):
        """Mean energy of the last iteration (NaN if empty)."""
        if not self._records:
            return np.nan
        return self._records[-1]['energy']

    @property
    def best_energy(self):
        if not self._records:
            return np.nan
        return min(r['energy'] for r in self._records)

    def iterations_per_sweep(self):
        """Number of recorded iterations in each sweep."""
        return self.to_frame().groupby('sweep').size().to_dict()

    def to_frame(self, reference=None):
        """Trace as pandas DataFrame.

        Parameters
        ----------
        reference : float, optional
                    Ground state energy; adds an ``epsilon`` column.

        """
        df = pd.DataFrame(self._records, columns=self.COLUMNS)
        if reference is not None:
            df['epsilon'] = relative_error(df['energy'].values, reference)
        return df

    @classmethod
    def from_frame(cls, df):
        """Split a (multi-trial) DataFrame into traces, ordered by trial."""
        traces = []
        for trial, sdf in df.groupby('trial', sort=True):
            records = sdf[cls.COLUMNS].to_dict(orient='records')
            traces.append(cls(trial=trial, records=records))
        return traces

    def summary(self, reference=None):
        """Per-trial summary dictionary."""
        d = {'trial': self.trial,
             'iterations': len(self),
             'final_energy': self.final_energy,
             'best_energy': self.best_energy,
             'wall_time': self._records[-1]['t_r'] if self._records else np.nan,
             'failed': self.error is not None}
        if self.error is not None:
            d['error'] = str(self.error)
        if reference is not None and self._records:
            d['final_epsilon'] = float(relative_error(self.final_energy, reference))
        return d
