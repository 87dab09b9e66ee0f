"""Fourier transforms and multiplier operators on the periodic grid."""

import math
import warnings

import numpy as np
from scipy.linalg import circulant
from scipy.special import bernoulli

from zerofilter.models import logger
from zerofilter.models.grid import Field, Spectrum
from zerofilter.utils import InvalidFieldError, NonRealSpectrumError

HERMITIAN_TOLERANCE = 1e-12
IMAGE_CUTOFF = 1e-16
KERNEL_MASS_TOLERANCE = 1e-12
MAX_IMAGES = 64
CORRECTION_TERMS = 8
TAIL_WIDTH = 0.05


# ========================
# Transforms
# ========================


def transform_forward(f):
    if not f.is_valid:
        raise InvalidFieldError("field has non-finite samples")
    n = f.grid.n_points
    return Spectrum(f.grid, np.fft.fft(f.samples) / n)


def transform_inverse(s, time=None, alpha=None, scale=None):
    """Real field with coefficients s; `scale` sets the symmetry tolerance.

    The tolerance is relative to `scale` (default: the largest coefficient),
    so round-off left behind by an annihilating multiplier is not mistaken
    for a genuinely complex field.
    """
    defect = s.hermitian_defect(scale)
    if defect > HERMITIAN_TOLERANCE:
        raise NonRealSpectrumError(
            f"spectrum is not Hermitian (relative defect {defect:.3e})"
        )
    symmetric = 0.5 * (s.coeffs + s.mirrored())
    samples = np.fft.ifft(symmetric).real * s.grid.n_points
    return Field(s.grid, samples, time=time, alpha=alpha)


def apply_multiplier(s, symbol):
    """Multiply c_k by symbol(xi_k); symbol is a callable or a ready array."""
    values = symbol(s.grid.frequencies) if callable(symbol) else symbol
    values = np.broadcast_to(np.asarray(values, dtype=complex), s.coeffs.shape)
    if not np.all(np.isfinite(values)):
        raise ValueError("multiplier symbol is not finite at every grid frequency")
    return Spectrum(s.grid, s.coeffs * values)


def _apply(f, values):
    spectrum = transform_forward(f)
    scale = float(np.max(np.abs(spectrum.coeffs))) * float(np.max(np.abs(values)))
    out = apply_multiplier(spectrum, values)
    return transform_inverse(out, time=f.time, alpha=f.alpha, scale=scale)


# ========================
# Multiplier symbols
# ========================


def derivative_symbol(grid, order):
    values = (1j * grid.frequencies) ** order
    if order % 2:
        values[grid.nyquist_index] = 0.0
    return values


def helmholtz_symbol(grid, alpha):
    return 1.0 / (1.0 + alpha**2 * grid.frequencies**2)


def dissipation_symbol(grid, gamma):
    xi = np.abs(grid.frequencies)
    values = np.zeros_like(xi)
    nonzero = xi > 0
    values[nonzero] = xi[nonzero] ** gamma
    return values


def bessel_symbol(grid, s):
    return (1.0 + grid.frequencies**2) ** (0.5 * s)


# ========================
# Field operators
# ========================


def derivative(f, order=1):
    if order < 1:
        raise ValueError(f"derivative order must be >= 1, got {order}")
    return _apply(f, derivative_symbol(f.grid, order))


def helmholtz_inverse(f, alpha):
    if alpha < 0:
        raise ValueError(f"alpha must be nonnegative, got {alpha}")
    if alpha == 0:
        return f
    return _apply(f, helmholtz_symbol(f.grid, alpha))


def fractional_laplacian(f, gamma):
    if not 0.0 <= gamma <= 2.0:
        raise ValueError(f"gamma must lie in [0, 2], got {gamma}")
    return _apply(f, dissipation_symbol(f.grid, gamma))


def js_operator(f, s):
    if s == 0:
        return f
    return _apply(f, bessel_symbol(f.grid, s))


def dealias(s):
    return Spectrum(s.grid, np.where(s.grid.dealias_mask, s.coeffs, 0.0))


def band_project(f):
    return transform_inverse(dealias(transform_forward(f)), time=f.time, alpha=f.alpha)


def spectral_shift(f, shift):
    """Translate by `shift`: the result samples u(x - shift)."""
    phase = np.exp(-1j * f.grid.frequencies * shift)
    nyq = f.grid.nyquist_index
    phase[nyq] = np.cos(f.grid.frequencies[nyq] * shift)
    return _apply(f, phase)


def interpolate(f, factor):
    """Zero-pad the spectrum onto a grid refined by `factor`."""
    factor = int(factor)
    if factor == 1:
        return f
    fine = f.grid.refined(factor)
    n, m = f.grid.n_points, fine.n_points
    c = transform_forward(f).coeffs
    padded = np.zeros(m, dtype=complex)
    half = n // 2
    padded[:half] = c[:half]
    padded[m - half + 1 :] = c[half + 1 :]
    # the unpaired mode is split between +N/2 and -N/2
    padded[half] = 0.5 * c[half]
    padded[m - half] = 0.5 * c[half]
    samples = np.fft.ifft(padded).real * m
    return Field(fine, samples, time=f.time, alpha=f.alpha)


def steepest_descent(f, factor=16):
    """max(-f') over a grid refined by `factor`."""
    return float(np.max(-interpolate(derivative(f), factor).samples))


def evaluate(f, x, order=0, chunk=4096):
    """Evaluate the trigonometric interpolant (or a derivative) at points x."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    grid = f.grid
    c = transform_forward(f).coeffs
    xi = grid.frequencies
    nyq = grid.nyquist_index
    weights = (1j * xi) ** order * c
    paired = np.ones(grid.n_points, dtype=bool)
    paired[nyq] = False
    out = np.empty(x.shape)
    for start in range(0, x.size, chunk):
        xs = x[start : start + chunk]
        phases = np.exp(1j * np.outer(xs, xi[paired]))
        values = (phases @ weights[paired]).real
        if order % 2 == 0:
            sign = (-1) ** (order // 2)
            values += sign * xi[nyq] ** order * c[nyq].real * np.cos(xi[nyq] * xs)
        out[start : start + chunk] = values
    return out


def boundary_tail(f, center=None):
    """Largest |u| on the part of the torus farthest from `center`.

    Nodes at torus distance >= (1/2 - TAIL_WIDTH) L from the center count;
    the center defaults to the location of max |u|.
    """
    grid = f.grid
    if center is None:
        center = grid.nodes[int(np.argmax(np.abs(f.samples)))]
    offset = np.mod(grid.nodes - center, grid.period)
    distance = np.minimum(offset, grid.period - offset)
    far = distance >= (0.5 - TAIL_WIDTH) * grid.period
    return float(np.max(np.abs(f.samples[far])))


# ========================
# Direct kernel quadrature
# ========================


def _image_count(period, alpha):
    needed = math.ceil(math.log(1.0 / IMAGE_CUTOFF) * alpha / period)
    images = min(max(needed, 1), MAX_IMAGES)
    lost_mass = math.exp(-images * period / alpha)
    if lost_mass > KERNEL_MASS_TOLERANCE:
        warnings.warn(
            f"green kernel periodization truncated at {images} images loses "
            f"{lost_mass:.2e} of the kernel mass (alpha={alpha}, L={period})",
            RuntimeWarning,
        )
    return images


def periodized_kernel(grid, alpha):
    """g(x) = exp(-|x|/alpha)/(2 alpha) summed over its images, at the nodes."""
    images = _image_count(grid.period, alpha)
    shifts = np.arange(-images - 1, images + 1) * grid.period
    distance = np.abs(grid.nodes[:, None] + shifts[None, :])
    return np.exp(-distance / alpha).sum(axis=1) / (2.0 * alpha)


def green_convolve(f, alpha):
    """(g * f)(x_j) by direct quadrature against the periodized kernel.

    The integrand has a kink where the kernel peaks, so the plain trapezoidal
    sum carries an O(h^2) error; the Euler-Maclaurin endpoint terms of the
    kink are subtracted. The jump of the r-th kernel derivative at the peak is
    -alpha^(-r-1) for odd r and 0 for even r.
    """
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    grid = f.grid
    h = grid.spacing
    if h / alpha >= np.pi:
        raise ValueError(
            f"kernel width alpha={alpha} is not resolved by spacing h={h:.3g}"
        )
    kernel = periodized_kernel(grid, alpha)
    trapezoid = h * (circulant(kernel) @ f.samples)

    orders = 2 * CORRECTION_TERMS - 1
    derivs = [f.samples] + [derivative(f, m).samples for m in range(1, orders + 1)]
    bern = bernoulli(2 * CORRECTION_TERMS)
    correction = np.zeros(grid.n_points)
    for k in range(1, CORRECTION_TERMS + 1):
        n = 2 * k - 1
        jump = sum(
            math.comb(n, r) * alpha ** (-(r + 1)) * derivs[n - r]
            for r in range(1, n + 1, 2)
        )
        correction += bern[2 * k] / math.factorial(2 * k) * h ** (2 * k) * jump
    logger.debug(
        "green_convolve alpha=%s: max endpoint correction %.3e",
        alpha,
        float(np.max(np.abs(correction))),
    )
    return f.with_samples(trapezoid - correction)


def circular_convolve(a, b):
    """Coefficient-space circular convolution sum_m a_m b_(k-m)."""
    return circulant(b) @ a
