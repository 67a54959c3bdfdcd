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
"""Collection of utility functions."""

import numpy as np


def logcosh(z):
    """Compute ``ln(2 cosh(z))`` for complex input without overflow.

    Uses ``ln(2cosh z) = s*z + ln(1 + exp(-2 s z))`` with ``s = sign(Re z)``
    and maps the imaginary part back onto the principal branch.

    Parameters
    ----------
    z :         complex | array of complex

    Returns
    -------
    complex | array of complex

    """
    z = np.asarray(z, dtype=np.complex128)
    zs = np.where(z.real < 0, -z, z)
    out = zs + np.log1p(np.exp(-2.0 * zs))
    imag = np.remainder(out.imag + np.pi, 2.0 * np.pi) - np.pi
    return out.real + 1j * imag


def is_iterable(x):
    """Check if object is iterable but not string."""
    if hasattr(x, '__contains__') and not isinstance(x, str):
        return True
    return False


def as_extents(x):
    """Turn an int or list-like into a tuple of ints."""
    if is_iterable(x):
        return tuple(int(v) for v in x)
    return (int(x), )


def derived_seed(*entropy):
    """Derive a reproducible 63-bit seed from a tuple of integers.

    Parameters
    ----------
    *entropy :  int
                E.g. ``(trial_seed, iteration)``.

    Returns
    -------
    int

    """
    ss = np.random.SeedSequence([int(e) for e in entropy])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def normalized_weights(weights, n):
    """Return weights that sum to one (uniform if ``weights`` is None)."""
    if weights is None:
        return np.full(n, 1.0 / n)
    weights = np.asarray(weights, dtype=float)
    return weights / weights.sum()


def to_complex_pairs(x):
    """Convert complex array into a list of ``[re, im]`` pairs (for JSON)."""
    x = np.asarray(x, dtype=np.complex128).ravel()
    return np.stack([x.real, x.imag], axis=1).tolist()


def from_complex_pairs(pairs):
    """Convert list of ``[re, im]`` pairs back into a complex array."""
    pairs = np.asarray(pairs, dtype=float).reshape(-1, 2)
    return pairs[:, 0] + 1j * pairs[:, 1]


def chunks(n, size):
    """Yield ``slice`` objects covering ``range(n)`` in pieces of ``size``."""
    size = max(1, int(size))
    for start in range(0, n, size):
        yield slice(start, min(start + size, n))
