from dataclasses import dataclass
from functools import cached_property

import numpy as np

from zerofilter.models.grid import Grid

RAMP_START = 1.0
RAMP_END = 4.0 / 3.0


def _h(t):
    out = np.zeros_like(t)
    positive = t > 0
    out[positive] = np.exp(-1.0 / t[positive])
    return out


def smooth_step(t):
    """C-infinity transition: 0 for t <= 0, 1 for t >= 1."""
    t = np.asarray(t, dtype=float)
    a, b = _h(t), _h(1.0 - t)
    return a / (a + b)


def chi(xi):
    """Low-pass profile: 1 on |xi| <= 1, 0 on |xi| >= 4/3."""
    t = (np.abs(np.asarray(xi, dtype=float)) - RAMP_START) / (RAMP_END - RAMP_START)
    return 1.0 - smooth_step(t)


def phi(xi):
    xi = np.asarray(xi, dtype=float)
    return chi(0.5 * xi) - chi(xi)


@dataclass(frozen=True)
class DyadicPartition:
    """chi and the annuli phi(2^-q xi) evaluated on one grid's frequencies."""

    grid: Grid

    @cached_property
    def q_max(self):
        # chi(2^-(q+1) xi) = 1 on every grid frequency once 2^(q+1) >= max |xi|
        top = float(np.max(np.abs(self.grid.frequencies)))
        q = 0
        while 2.0 ** (q + 1) < top:
            q += 1
        return q

    @cached_property
    def low(self):
        values = chi(self.grid.frequencies)
        values.setflags(write=False)
        return values

    def block_symbol(self, q):
        if q == -1:
            return self.low
        return phi(2.0 ** (-q) * self.grid.frequencies)

    def cutoff_symbol(self, n):
        """Smooth S_n: the telescoped sum of blocks -1..n-1, chi(2^-n xi)."""
        return chi(2.0 ** (-n) * self.grid.frequencies)

    def blocks(self):
        return [self.block_symbol(q) for q in range(-1, self.q_max + 1)]

    def unity_defect(self):
        total = np.sum(self.blocks(), axis=0)
        return float(np.max(np.abs(total - 1.0)))


def sharp_cutoff_symbol(grid, n):
    edge = 2.0 ** (n - 1) * RAMP_END
    return (np.abs(grid.frequencies) < edge).astype(float)


@dataclass(frozen=True)
class NormReport:
    s: float
    value: float
    tail_profile: tuple = ()

    def __float__(self):
        return self.value
