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


# Pre-configured tilted Ising models for people to play with:
# - the three phases of the chain plus the AFM/PM transition point
# - the square lattice benchmark

from .model import TimHamiltonian, build_lattice
from .utils import as_extents

__all__ = ['PRESETS', 'preset_hamiltonian']

PRESETS = {
    'antiferromagnetic': {'J': 1.0, 'h_x': 0.5, 'h_z': 0.5},
    'transition': {'J': 1.0, 'h_x': 0.95, 'h_z': 0.5},
    'paramagnetic': {'J': 1.0, 'h_x': 1.5, 'h_z': 0.5},
    'ferromagnetic': {'J': -1.0, 'h_x': 0.5, 'h_z': 0.5},
    'square': {'J': 1.0, 'h_x': 0.5, 'h_z': 0.5},
}


def preset_hamiltonian(name, extents):
    """Build a pre-configured Hamiltonian.

    Parameters
    ----------
    name :      "antiferromagnetic" | "transition" | "paramagnetic" | "ferromagnetic" | "square"
    extents :   int | (int, int)
                Chain length or grid shape.

    Returns
    -------
    TimHamiltonian

    """
    if name not in PRESETS:
        raise ValueError(f'Unknown preset "{name}". Available: {", ".join(PRESETS)}')

    extents = as_extents(extents)
    return TimHamiltonian(build_lattice(len(extents), extents), **PRESETS[name])
