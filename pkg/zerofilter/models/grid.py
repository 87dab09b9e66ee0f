"""Periodic grid, sampled fields and their Fourier coefficients."""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

MIN_POINTS = 8


def _readonly(array, dtype):
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Grid:
    n_points: int
    period: float = 2.0 * np.pi

    def __post_init__(self):
        n = int(self.n_points)
        if n < MIN_POINTS or n & (n - 1):
            raise ValueError(
                f"n_points must be a power of two >= {MIN_POINTS}, got {self.n_points}"
            )
        if not self.period > 0 or not np.isfinite(self.period):
            raise ValueError(f"period must be positive, got {self.period}")
        object.__setattr__(self, "n_points", n)
        object.__setattr__(self, "period", float(self.period))

    @property
    def spacing(self):
        return self.period / self.n_points

    @cached_property
    def nodes(self):
        # half-open [0, L): x = L is the image of x = 0
        return _readonly(np.arange(self.n_points) * self.spacing, float)

    @cached_property
    def wavenumbers(self):
        """Integer k in FFT order: 0, 1, ..., N/2-1, -N/2, ..., -1."""
        n = self.n_points
        return _readonly(np.fft.fftfreq(n, d=1.0 / n).round().astype(int), int)

    @cached_property
    def frequencies(self):
        return _readonly(2.0 * np.pi * self.wavenumbers / self.period, float)

    @property
    def nyquist_index(self):
        return self.n_points // 2

    @property
    def max_frequency(self):
        return np.pi * self.n_points / self.period

    @cached_property
    def dealias_mask(self):
        """True on the modes kept by the two-thirds rule, |k| <= N/3."""
        return _readonly(3 * np.abs(self.wavenumbers) <= self.n_points, bool)

    def refined(self, factor):
        return Grid(self.n_points * int(factor), self.period)


@dataclass(frozen=True)
class Field:
    grid: Grid
    samples: np.ndarray
    time: Optional[float] = None
    alpha: Optional[float] = None

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float).reshape(-1)
        if samples.shape != (self.grid.n_points,):
            raise ValueError(
                f"expected {self.grid.n_points} samples, got {samples.shape[0]}"
            )
        object.__setattr__(self, "samples", _readonly(samples, float))

    @classmethod
    def from_function(cls, grid, func, time=None, alpha=None):
        return cls(grid, func(grid.nodes), time=time, alpha=alpha)

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.n_points))

    @property
    def is_valid(self):
        return bool(np.all(np.isfinite(self.samples)))

    def with_samples(self, samples):
        return Field(self.grid, samples, time=self.time, alpha=self.alpha)

    def with_meta(self, time=None, alpha=None):
        return Field(self.grid, self.samples, time=time, alpha=alpha)

    def __add__(self, other):
        return self.with_samples(self.samples + _samples_of(other))

    def __sub__(self, other):
        return self.with_samples(self.samples - _samples_of(other))

    def __mul__(self, other):
        return self.with_samples(self.samples * _samples_of(other))

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_samples(-self.samples)

    def max_abs(self):
        return float(np.max(np.abs(self.samples)))

    def l2_norm(self):
        return float(np.sqrt(np.sum(self.samples**2) * self.grid.spacing))


def _samples_of(other):
    if isinstance(other, Field):
        return other.samples
    return other


@dataclass(frozen=True)
class Spectrum:
    """Coefficients c_k = (1/N) sum_j u(x_j) exp(-i xi_k x_j), FFT order."""

    grid: Grid
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=complex).reshape(-1)
        if coeffs.shape != (self.grid.n_points,):
            raise ValueError(
                f"expected {self.grid.n_points} coefficients, got {coeffs.shape[0]}"
            )
        object.__setattr__(self, "coeffs", _readonly(coeffs, complex))

    def mirrored(self):
        """conj(c_{-k}) at index k."""
        return np.conj(np.roll(self.coeffs[::-1], 1))

    def hermitian_defect(self, scale=None):
        if scale is None:
            scale = float(np.max(np.abs(self.coeffs)))
        if scale == 0.0:
            return 0.0
        return float(np.max(np.abs(self.coeffs - self.mirrored()))) / scale

    def energy(self):
        """L * sum |c_k|^2, the squared L2 norm by Parseval."""
        return float(self.grid.period * np.sum(np.abs(self.coeffs) ** 2))
