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
"""Exceptions raised by slonqs.

All of them derive from the built-in exception a caller would expect
(mostly ``ValueError``) so ``except ValueError`` keeps working.
"""

__all__ = ['GeometryError', 'DimensionError', 'BlockError', 'ScheduleError',
           'EstimationError', 'ObservableError', 'CapabilityError',
           'ConfigurationError', 'RunError', 'NonFiniteEnergyError']


class GeometryError(ValueError):
    """Invalid lattice dimensionality or extents."""


class DimensionError(ValueError):
    """Spin configuration does not match the lattice."""


class BlockError(ValueError):
    """Parameter block does not fit the lattice."""


class ScheduleError(ValueError):
    """Sweep positions can not be tiled with the requested stride."""


class EstimationError(ValueError):
    """Estimator called on an empty sample batch."""


class ObservableError(NotImplementedError):
    """Observable not available for this lattice."""


class CapabilityError(ValueError):
    """System too large for exact treatment."""


class ConfigurationError(ValueError):
    """Invalid run configuration.

    Parameters
    ----------
    field :     str
                Dotted name of the offending field, e.g. ``optimizer.s``.
    msg :       str
                What is wrong with it.

    """

    def __init__(self, field, msg):
        self.field = field
        super().__init__(f'Invalid configuration field "{field}": {msg}')


class RunError(RuntimeError):
    """Every trial of a run failed."""


class NonFiniteEnergyError(FloatingPointError):
    """Energy estimate became NaN or infinite during an optimization."""
