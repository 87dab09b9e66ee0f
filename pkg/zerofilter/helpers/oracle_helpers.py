"""Reference solutions: characteristics, peakons and a finite-difference solver."""

import math

import numpy as np
import scipy.sparse as sps
from scipy.optimize import minimize_scalar
from scipy.sparse.linalg import splu

from zerofilter.helpers.dynamics_helpers import cfl_dt
from zerofilter.helpers.spectral_helpers import (
    IMAGE_CUTOFF,
    MAX_IMAGES,
    evaluate,
    interpolate,
    spectral_shift,
    steepest_descent,
    transform_forward,
)
from zerofilter.models import logger
from zerofilter.models.grid import Field
from zerofilter.models.oracle import CharacteristicSolution
from zerofilter.models.params import StepControl
from zerofilter.utils import (
    CharacteristicRangeError,
    InstabilityError,
    RootFindError,
)

SHOCK_REFINEMENT = 16
NEWTON_TOLERANCE = 1e-13
NEWTON_MAX_ITER = 100
FD_REFINEMENT = 4
FD_DT_DIVISOR = 10
DENSE_SAMPLES = 1 << 14


# ========================
# Burgers characteristics
# ========================


def shock_time(u0):
    """1 / (3 max(-u0')) on a 16x refined grid; inf if u0 never decreases."""
    steepest = steepest_descent(u0, SHOCK_REFINEMENT)
    if steepest <= 0.0:
        return math.inf
    return 1.0 / (3.0 * steepest)


def characteristic_solution(u0):
    """Characteristics oracle for a sampled profile (trigonometric interpolant)."""
    return CharacteristicSolution(
        profile=lambda x: evaluate(u0, x),
        slope=lambda x: evaluate(u0, x, order=1),
        period=u0.grid.period,
        shock_time=shock_time(u0),
        amplitude=u0.max_abs(),
    )


def characteristic_solution_from_function(func, slope, period=2.0 * np.pi):
    """Characteristics oracle for an analytic profile with known derivative."""
    x = np.linspace(0.0, period, DENSE_SAMPLES, endpoint=False)
    steepest = float(np.max(-slope(x)))
    amplitude = float(np.max(np.abs(func(x))))
    return CharacteristicSolution(
        profile=func,
        slope=slope,
        period=period,
        shock_time=math.inf if steepest <= 0.0 else 1.0 / (3.0 * steepest),
        amplitude=amplitude,
    )


def _scalar(func, x):
    return float(np.asarray(func(np.array([x]))).reshape(-1)[0])


def burgers_characteristics(sol, x, t):
    """u(x, t) from x0 + 3 t u0(x0) = x, by Newton safeguarded with bisection."""
    if not sol.is_valid_time(t):
        raise CharacteristicRangeError(
            f"t={t} outside the validity window [0, {sol.valid_until:.6g})"
        )
    if t == 0.0 or sol.amplitude == 0.0:
        return _scalar(sol.profile, x)

    def g(x0):
        return x0 + 3.0 * t * _scalar(sol.profile, x0) - x

    # g is increasing before the shock, so the root lies within the sweep of
    # the largest speed
    reach = 3.0 * t * sol.amplitude
    lo, hi = x - reach, x + reach
    x0 = x - 3.0 * t * _scalar(sol.profile, x)
    for _ in range(NEWTON_MAX_ITER):
        value = g(x0)
        if value > 0.0:
            hi = min(hi, x0)
        else:
            lo = max(lo, x0)
        slope = 1.0 + 3.0 * t * _scalar(sol.slope, x0)
        candidate = x0 - value / slope if slope > 0.0 else lo - 1.0
        if not lo <= candidate <= hi:
            candidate = 0.5 * (lo + hi)
        if abs(candidate - x0) <= NEWTON_TOLERANCE or hi - lo <= NEWTON_TOLERANCE:
            return _scalar(sol.profile, candidate)
        x0 = candidate
    raise RootFindError(
        f"characteristic through x={x} at t={t} not found in "
        f"{NEWTON_MAX_ITER} iterations"
    )


def characteristic_field(sol, grid, t):
    samples = [burgers_characteristics(sol, x, t) for x in grid.nodes]
    return Field(grid, samples, time=t, alpha=0.0)


# ========================
# Peakons and energy
# ========================


def _peakon_images(alpha, period):
    needed = math.ceil(math.log(1.0 / IMAGE_CUTOFF) * alpha / period)
    return min(max(needed, 1), MAX_IMAGES)


def peakon_field(c, alpha, t, grid):
    """Periodized traveling peakon c exp(-|x - c t| / alpha)."""
    if not alpha > 0:
        raise ValueError(f"peakon width alpha must be positive, got {alpha}")
    images = _peakon_images(alpha, grid.period)
    crest = np.mod(c * t, grid.period)
    offset = grid.nodes - crest
    shifts = np.arange(-images - 1, images + 2) * grid.period
    distance = np.abs(offset[:, None] + shifts[None, :])
    samples = c * np.exp(-distance / alpha).sum(axis=1)
    return Field(grid, samples, time=t, alpha=alpha)


def peakon_energy_exact(c, alpha, period):
    """Energy of the periodized peakon: 2 c^2 alpha coth(L / (2 alpha))."""
    return 2.0 * c**2 * alpha / math.tanh(period / (2.0 * alpha))


def energy_ch(u, alpha):
    """L sum (1 + alpha^2 xi^2) |c_k|^2, the discrete H^1_alpha energy."""
    coeffs = transform_forward(u).coeffs
    weights = 1.0 + alpha**2 * u.grid.frequencies**2
    return float(u.grid.period * np.sum(weights * np.abs(coeffs) ** 2))


def peakon_shape_error(u, c, alpha, t):
    """Relative L2 distance to the exact peakon after the best translation."""
    reference = peakon_field(c, alpha, t, u.grid)
    h = u.grid.spacing
    # coarse alignment on the crest, then a continuous search around it
    nodes, period = u.grid.nodes, u.grid.period
    lag = nodes[int(np.argmax(u.samples))] - nodes[int(np.argmax(reference.samples))]
    lag = (lag + 0.5 * period) % period - 0.5 * period

    def misfit(shift):
        return (spectral_shift(u, -shift) - reference).l2_norm()

    best = minimize_scalar(
        misfit, bounds=(lag - 2.0 * h, lag + 2.0 * h), method="bounded"
    )
    return float(best.fun) / reference.l2_norm()


# ========================
# Finite-difference oracle
# ========================


def _cyclic_operator(n, lower, main, upper):
    """Periodic tridiagonal matrix with constant bands."""
    matrix = sps.diags(
        [np.full(n - 1, lower), np.full(n, main), np.full(n - 1, upper)],
        offsets=[-1, 0, 1],
        shape=(n, n),
        format="lil",
    )
    matrix[0, n - 1] = lower
    matrix[n - 1, 0] = upper
    return matrix.tocsc()


def _central_first(u, h):
    return (np.roll(u, -1) - np.roll(u, 1)) / (2.0 * h)


def _central_second(u, h):
    return (np.roll(u, -1) - 2.0 * u + np.roll(u, 1)) / h**2


def fd_reference(u0, params, t_end, control=None):
    """Second-order finite differences on a 4x finer grid, RK4 with dt/10.

    The Helmholtz inverse is a cyclic tridiagonal solve; Lambda^2 = -d2/dx2 is
    the only dissipation supported.
    """
    control = control or StepControl(t_end=t_end)
    if params.nu > 0.0 and params.gamma != 2.0:
        raise ValueError("the finite-difference oracle only supports gamma = 2")
    fine = interpolate(u0, FD_REFINEMENT)
    n, h = fine.grid.n_points, fine.grid.spacing
    alpha, nu = params.alpha, params.nu
    threshold = control.slope_threshold(fine.grid)
    dt_target = cfl_dt(u0, control, params) / FD_DT_DIVISOR
    if nu > 0.0:
        dt_target = min(dt_target, h**2 / (2.0 * nu))
    steps = max(1, math.ceil(t_end / dt_target))
    dt = t_end / steps

    helmholtz = None
    if not params.is_burgers:
        a = alpha**2 / h**2
        helmholtz = splu(_cyclic_operator(n, -a, 1.0 + 2.0 * a, -a))

    def rhs(u):
        ux = _central_first(u, h)
        out = nu * _central_second(u, h)
        if helmholtz is None:
            return out - 3.0 * u * ux
        pressure = helmholtz.solve(u * u + 0.5 * alpha**2 * ux * ux)
        return out - u * ux - _central_first(pressure, h)

    u = fine.samples.copy()
    logger.debug("fd_reference: N=%d, %d steps of dt=%.3g", n, steps, dt)
    for step in range(steps):
        k1 = rhs(u)
        k2 = rhs(u + 0.5 * dt * k1)
        k3 = rhs(u + 0.5 * dt * k2)
        k4 = rhs(u + dt * k3)
        u = u + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = (step + 1) * dt
        if not np.all(np.isfinite(u)):
            raise InstabilityError(f"finite-difference run blew up at t={t:.6g}", t)
        steepest = float(np.min(_central_first(u, h)))
        if steepest < threshold:
            raise InstabilityError(
                f"finite-difference run broke at t={t:.6g} (slope {steepest:.3g})", t
            )
    return Field(u0.grid, u[::FD_REFINEMENT], time=t_end, alpha=alpha)

