"""Compensated reduction helpers for long alternating sums.

numpy's pairwise summation is already good inside a contiguous block; these
helpers add a Neumaier pass across block partials so accumulations stay
honest at 1e5..1e7 terms without giving up vectorized speed.  All reductions
use a fixed left-to-right block order, so results are bit-reproducible for a
given input ordering.
"""

from __future__ import annotations

import numpy as np

_BLOCK = 4096


def neumaier(values) -> float:
    """Neumaier-compensated sum of a 1-d real sequence."""
    total = 0.0
    comp = 0.0
    for v in values:
        v = float(v)
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
    return total + comp


def block_sum(values: np.ndarray, block: int = _BLOCK) -> float:
    """Sum a real array: pairwise inside blocks, Neumaier across them."""
    v = np.asarray(values)
    if v.size == 0:
        return 0.0
    edges = np.arange(0, v.size, block)
    partials = np.add.reduceat(v, edges)
    return neumaier(partials)


def block_sum_complex(values: np.ndarray, block: int = _BLOCK) -> complex:
    v = np.asarray(values)
    if v.size == 0:
        return 0.0 + 0.0j
    edges = np.arange(0, v.size, block)
    partials = np.add.reduceat(v, edges)
    return complex(neumaier(partials.real), neumaier(partials.imag))
