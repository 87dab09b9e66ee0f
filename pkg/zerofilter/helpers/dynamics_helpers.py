"""Right-hand sides, time stepping and breaking detection.

The solver state is the coefficient vector c_k (FFT order, c = fft(u)/N);
Field-level functions wrap the array-level ones below.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from zerofilter.helpers.spectral_helpers import (
    band_project,
    derivative_symbol,
    dissipation_symbol,
    helmholtz_symbol,
    steepest_descent,
    transform_forward,
)
from zerofilter.models import logger
from zerofilter.models.grid import Field, Grid
from zerofilter.models.params import ModelParams
from zerofilter.models.trajectory import (
    BREAKING,
    INSTABILITY,
    NORM_CAP,
    RunStatus,
    StepDiagnostics,
    TrajectoryBuilder,
)
from zerofilter.utils import InstabilityError, UndefinedRatioError

SPEED_FLOOR = 1e-8
EXPLICIT_DISSIPATION_LIMIT = 2.0
ADVECTION_FACTOR = 3.0
# relative slack when deciding that a step lands on t_end
END_TOLERANCE = 1e-12
SHOCK_FRACTION = 0.25


# ========================
# Array-level operators
# ========================


@dataclass(frozen=True)
class Operators:
    """Symbols for one (grid, params) pair."""

    n_points: int
    period: float
    d1: np.ndarray
    helmholtz: np.ndarray
    dissipation: np.ndarray
    mask: np.ndarray
    tail_band: np.ndarray
    alpha: float
    nu: float


@lru_cache(maxsize=64)
def operators(grid, params):
    k = np.abs(grid.wavenumbers)
    n = grid.n_points
    if params.dealias:
        mask = grid.dealias_mask.astype(float)
        # top third of what a dealiased run can hold
        tail_band = (9 * k > 2 * n) & (3 * k <= n)
    else:
        mask = np.ones(n)
        tail_band = 3 * k > n
    return Operators(
        n_points=n,
        period=grid.period,
        d1=derivative_symbol(grid, 1),
        helmholtz=helmholtz_symbol(grid, params.alpha),
        dissipation=dissipation_symbol(grid, params.gamma),
        mask=mask,
        tail_band=tail_band,
        alpha=params.alpha,
        nu=params.nu,
    )


def _to_samples(c, n):
    return np.fft.ifft(c).real * n


def _to_coeffs(samples, n):
    return np.fft.fft(samples) / n


def _product(ops, a, b):
    """Coefficients of the pointwise product, truncated to the kept band."""
    return ops.mask * _to_coeffs(a * b, ops.n_points)


def _nonlinear_ch(c, ops):
    n = ops.n_points
    u = _to_samples(c, n)
    ux = _to_samples(ops.d1 * c, n)
    advection = _product(ops, u, ux)
    pressure = _product(ops, u, u) + 0.5 * ops.alpha**2 * _product(ops, ux, ux)
    return -advection - ops.d1 * ops.helmholtz * pressure


def _nonlinear_burgers(c, ops):
    n = ops.n_points
    u = _to_samples(c, n)
    ux = _to_samples(ops.d1 * c, n)
    return -ADVECTION_FACTOR * _product(ops, u, ux)


def nonlinear_term(params):
    if params.is_burgers:
        return _nonlinear_burgers
    return _nonlinear_ch


def _check_finite(values, time):
    if not np.all(np.isfinite(values)):
        raise InstabilityError(f"non-finite values at t={time}", time=time)


def _rhs_coeffs(c, ops, nonlinear, time=None):
    out = nonlinear(c, ops) - ops.nu * ops.dissipation * c
    _check_finite(out, time)
    return out


def _field_rhs(u, params, nonlinear):
    ops = operators(u.grid, params)
    c = transform_forward(u).coeffs
    out = _rhs_coeffs(c, ops, nonlinear, u.time)
    return u.with_samples(_to_samples(out, ops.n_points))


# ========================
# Right-hand sides
# ========================


def rhs_ch(u, params):
    """-u u_x - nu Lambda^gamma u - d/dx H (u^2 + alpha^2/2 u_x^2).

    H = (1 - alpha^2 d2/dx2)^-1; quadratic products are dealiased when
    params.dealias is set.
    """
    return _field_rhs(u, params, _nonlinear_ch)


def rhs_burgers(u, params):
    """-3 u u_x - nu Lambda^gamma u; alpha is ignored."""
    return _field_rhs(u, params, _nonlinear_burgers)


def rhs_equivalent_form(u, params):
    """The same right-hand side as rhs_ch written around 3 u u_x.

    -3 u u_x - alpha^2 d3/dx3 H (u^2) - alpha^2/2 d/dx H (u_x^2) - nu Lambda^gamma u,
    with H the Helmholtz inverse.
    """
    ops = operators(u.grid, params)
    n = ops.n_points
    c = transform_forward(u).coeffs
    samples = _to_samples(c, n)
    ux = _to_samples(ops.d1 * c, n)
    a2 = ops.alpha**2
    out = (
        -ADVECTION_FACTOR * _product(ops, samples, ux)
        - a2 * ops.d1**3 * ops.helmholtz * _product(ops, samples, samples)
        - 0.5 * a2 * ops.d1 * ops.helmholtz * _product(ops, ux, ux)
        - ops.nu * ops.dissipation * c
    )
    _check_finite(out, u.time)
    return u.with_samples(_to_samples(out, n))


def source_term_I(u_alpha, params):
    """alpha^2 d/dx H [d2/dx2 (u^2) + u_x^2 / 2] on the filtered solution."""
    if not params.alpha > 0:
        raise ValueError("the source term needs alpha > 0")
    ops = operators(u_alpha.grid, params)
    n = ops.n_points
    c = transform_forward(u_alpha).coeffs
    samples = _to_samples(c, n)
    ux = _to_samples(ops.d1 * c, n)
    inner = ops.d1**2 * _product(ops, samples, samples) + 0.5 * _product(ops, ux, ux)
    out = ops.alpha**2 * ops.d1 * ops.helmholtz * inner
    return u_alpha.with_samples(_to_samples(out, n))


def bilinear_b(f, g, alpha, dealias=True):
    """d/dx H (f g + alpha^2/2 f_x g_x)."""
    ops = operators(f.grid, ModelParams(alpha=alpha, dealias=dealias))
    n = ops.n_points
    cf = transform_forward(f).coeffs
    cg = transform_forward(g).coeffs
    fx = _to_samples(ops.d1 * cf, n)
    gx = _to_samples(ops.d1 * cg, n)
    inner = _product(ops, f.samples, g.samples)
    inner = inner + 0.5 * alpha**2 * _product(ops, fx, gx)
    return f.with_samples(_to_samples(ops.d1 * ops.helmholtz * inner, n))


def _dealiased_product(ops, a, b):
    return _to_samples(_product(ops, a, b), ops.n_points)


def difference_residual_v(a, b, params):
    """Largest deviation from the difference equation of two filtered solutions.

    rhs_ch(a) - rhs_ch(b) = -a v_x - v b_x - B(v, a + b) - nu Lambda^gamma v
    with v = a - b.
    """
    ops = operators(a.grid, params)
    v = a - b
    cv = transform_forward(v).coeffs
    vx = _to_samples(ops.d1 * cv, ops.n_points)
    bx = _to_samples(ops.d1 * transform_forward(b).coeffs, ops.n_points)
    linear = _to_samples(ops.nu * ops.dissipation * cv, ops.n_points)
    predicted = (
        -_dealiased_product(ops, a.samples, vx)
        - _dealiased_product(ops, v.samples, bx)
        - bilinear_b(v, a + b, params.alpha, params.dealias).samples
        - linear
    )
    actual = rhs_ch(a, params).samples - rhs_ch(b, params).samples
    return float(np.max(np.abs(actual - predicted)))


def difference_residual_w(a, b, params):
    """Largest deviation from the filtered-minus-Burgers difference equation.

    rhs_ch(a) - rhs_burgers(b) = -3 b w_x - 3 w a_x - I(a) - nu Lambda^gamma w
    with w = a - b.
    """
    ops = operators(a.grid, params)
    n = ops.n_points
    w = a - b
    wx = _to_samples(ops.d1 * transform_forward(w).coeffs, n)
    ax = _to_samples(ops.d1 * transform_forward(a).coeffs, n)
    linear = _to_samples(ops.nu * ops.dissipation * transform_forward(w).coeffs, n)
    predicted = (
        -ADVECTION_FACTOR * _dealiased_product(ops, b.samples, wx)
        - ADVECTION_FACTOR * _dealiased_product(ops, w.samples, ax)
        - source_term_I(a, params).samples
        - linear
    )
    actual = rhs_ch(a, params).samples - rhs_burgers(b, params).samples
    return float(np.max(np.abs(actual - predicted)))


def energy_rate_probe(u, params, s):
    """|d/dt ||u||^2_{H^s} / 2| / (||u_x||_inf ||u||^2_{H^s}) along the flow."""
    ops = operators(u.grid, params)
    c = transform_forward(u).coeffs
    rate = _rhs_coeffs(c, ops, nonlinear_term(params), u.time)
    weights = (1.0 + u.grid.frequencies**2) ** s
    d_half_norm = u.grid.period * float(np.sum(weights * (np.conj(c) * rate).real))
    norm_sq = u.grid.period * float(np.sum(weights * np.abs(c) ** 2))
    slope = float(np.max(np.abs(_to_samples(ops.d1 * c, ops.n_points))))
    if slope * norm_sq == 0.0:
        raise UndefinedRatioError("energy rate probe: denominator vanishes")
    return abs(d_half_norm) / (slope * norm_sq)


# ========================
# Time stepping
# ========================


def _cfl_from_max(max_speed, grid, control, params):
    speed = max(SPEED_FLOOR, ADVECTION_FACTOR * max_speed)
    dt = min(control.dt_max, control.cfl * grid.spacing / speed)
    if params.nu > 0 and not control.uses_integrating_factor(params):
        stiff = params.nu * grid.max_frequency**params.gamma
        if stiff > 0:
            dt = min(dt, EXPLICIT_DISSIPATION_LIMIT / stiff)
    return dt


def cfl_dt(u, control, params):
    return _cfl_from_max(u.max_abs(), u.grid, control, params)


def _rk4_coeffs(c, dt, f, time=None):
    k1 = f(c)
    k2 = f(c + 0.5 * dt * k1)
    k3 = f(c + 0.5 * dt * k2)
    k4 = f(c + dt * k3)
    out = c + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    _check_finite(out, time)
    return out


def _lawson_coeffs(c, dt, nonlinear, ops, time=None):
    """RK4 on exp(nu Lambda^gamma t) u, dissipation taken exactly."""
    decay = np.exp(-ops.nu * ops.dissipation * dt)
    half = np.exp(-0.5 * ops.nu * ops.dissipation * dt)

    def f(x):
        out = nonlinear(x, ops)
        _check_finite(out, time)
        return out

    k1 = f(c)
    k2 = f(half * (c + 0.5 * dt * k1))
    k3 = f(half * c + 0.5 * dt * k2)
    k4 = f(decay * c + dt * half * k3)
    out = decay * c + dt / 6.0 * (decay * k1 + 2.0 * half * (k2 + k3) + k4)
    _check_finite(out, time)
    return out


def step_rk4(u, dt, rhs):
    """One classical RK4 step of u' = rhs(u) for a Field-valued rhs."""

    def f(samples):
        out = rhs(u.with_samples(samples)).samples
        _check_finite(out, u.time)
        return out

    samples = _rk4_coeffs(u.samples, dt, f, u.time)
    time = None if u.time is None else u.time + dt
    return Field(u.grid, samples, time=time, alpha=u.alpha)


def step_if_rk4(u, dt, params, nonlinear=None):
    """Integrating-factor RK4; coincides with explicit RK4 when nu = 0.

    `nonlinear(c, ops)` overrides the transport terms of the model.
    """
    ops = operators(u.grid, params)
    c = transform_forward(u).coeffs
    nonlinear = nonlinear or nonlinear_term(params)
    out = _lawson_coeffs(c, dt, nonlinear, ops, u.time)
    time = None if u.time is None else u.time + dt
    return Field(u.grid, _to_samples(out, ops.n_points), time=time, alpha=u.alpha)


# ========================
# Diagnostics and breaking detection
# ========================


def diagnose(c, time, grid, ops, control):
    n = ops.n_points
    power = np.abs(c) ** 2
    xi2 = grid.frequencies**2
    norms = {
        s: float(np.sqrt(grid.period * np.sum((1.0 + xi2) ** s * power)))
        for s in control.norm_indices
    }
    slope = _to_samples(ops.d1 * c, n)
    total = float(np.sum(power))
    tail = float(np.sum(power[ops.tail_band])) / total if total > 0 else 0.0
    energy = grid.period * float(np.sum((1.0 + ops.alpha**2 * xi2) * power))
    return StepDiagnostics(
        time=time,
        norms=norms,
        min_slope=float(np.min(slope)),
        energy=energy,
        tail_fraction=tail,
    )


def detect_breaking(diagnostics, control, grid):
    """Status after a step: completed, or the first trigger that fired."""
    t = diagnostics.time
    if not np.isfinite(diagnostics.min_slope):
        return RunStatus(INSTABILITY, t, "non-finite slope")
    if diagnostics.min_slope < control.slope_threshold(grid):
        return RunStatus(
            BREAKING, t, f"min slope {diagnostics.min_slope:.4g} below threshold"
        )
    if diagnostics.tail_fraction > control.tail_fraction_threshold:
        return RunStatus(
            BREAKING,
            t,
            f"spectral tail holds {diagnostics.tail_fraction:.3g} of the energy",
        )
    cap_norm = diagnostics.norms[control.cap_index]
    if not cap_norm <= control.norm_cap:
        return RunStatus(NORM_CAP, t, f"H^{control.cap_index:g} norm {cap_norm:.4g}")
    return RunStatus()


# ========================
# Solver
# ========================


@dataclass
class _Member:
    builder: TrajectoryBuilder
    grid: Grid
    params: ModelParams
    ops: Operators
    coeffs: np.ndarray

    def advance(self, dt, time, control):
        nonlinear = nonlinear_term(self.params)
        if control.uses_integrating_factor(self.params):
            return _lawson_coeffs(self.coeffs, dt, nonlinear, self.ops, time)
        return _rk4_coeffs(
            self.coeffs,
            dt,
            lambda x: _rhs_coeffs(x, self.ops, nonlinear, time),
            time,
        )

    def snapshot(self, diagnostics):
        u = Field(
            self.grid,
            _to_samples(self.coeffs, self.grid.n_points),
            time=diagnostics.time,
            alpha=self.params.alpha,
        )
        self.builder.record(
            u,
            diagnostics.norms,
            diagnostics.min_slope,
            diagnostics.energy,
            diagnostics.tail_fraction,
        )


def _as_param_list(params, count):
    if isinstance(params, ModelParams):
        return [params] * count
    params = list(params)
    if len(params) != count:
        raise ValueError(f"expected {count} parameter sets, got {len(params)}")
    return params


def solve_ensemble(u0s, params, control, labels=None):
    """Advance several initial data in lockstep under one dt sequence.

    `params` is one ModelParams for every member or one per member, so filtered
    and Burgers runs can share a time grid. dt is the smallest CFL proposal
    among members still running; a member that breaks or goes unstable is
    frozen and the rest carry on.
    """
    if not u0s:
        return []
    grid = u0s[0].grid
    if any(u.grid != grid for u in u0s):
        raise ValueError("ensemble members must share one grid")
    labels = labels or [f"member-{i}" for i in range(len(u0s))]
    param_list = _as_param_list(params, len(u0s))
    control = with_horizon(control, u0s)

    members = []
    for label, u0, p in zip(labels, u0s, param_list):
        if p.dealias:
            u0 = band_project(u0)
        ops = operators(grid, p)
        member = _Member(
            TrajectoryBuilder(label, control.norm_indices),
            grid,
            p,
            ops,
            transform_forward(u0).coeffs,
        )
        diagnostics = diagnose(member.coeffs, 0.0, grid, ops, control)
        member.snapshot(diagnostics)
        member.builder.status = detect_breaking(diagnostics, control, grid)
        members.append(member)

    logger.info(
        "solve: %d member(s), N=%d, alphas=%s, t_end=%s",
        len(members),
        grid.n_points,
        sorted({p.alpha for p in param_list}),
        control.t_end,
    )

    t = 0.0
    step = 0
    while control.t_end - t > END_TOLERANCE * control.t_end:
        active = [m for m in members if m.builder.active]
        if not active:
            break
        if control.fixed_dt is not None:
            dt = control.fixed_dt
        else:
            dt = min(
                _cfl_from_max(
                    float(np.max(np.abs(_to_samples(m.coeffs, grid.n_points)))),
                    grid,
                    control,
                    m.params,
                )
                for m in active
            )
        remaining = control.t_end - t
        last = dt >= remaining - END_TOLERANCE * control.t_end
        if last:
            dt = remaining
        t_next = control.t_end if last else t + dt
        step += 1
        for member in active:
            try:
                member.coeffs = member.advance(dt, t, control)
            except InstabilityError as exc:
                member.builder.status = RunStatus(INSTABILITY, t_next, str(exc))
                logger.warning("%s: %s", member.builder.label, exc)
                continue
            diagnostics = diagnose(member.coeffs, t_next, grid, member.ops, control)
            status = detect_breaking(diagnostics, control, grid)
            if not status.completed or last or step % control.save_every == 0:
                member.snapshot(diagnostics)
            if not status.completed:
                member.builder.status = status
                logger.warning(
                    "%s stopped: %s (%s)", member.builder.label, status, status.reason
                )
        t = t_next

    logger.info("solve finished after %d steps at t=%.6g", step, t)
    return [m.builder.freeze() for m in members]


def solve(u0, params, control, label="solution"):
    return solve_ensemble([u0], params, control, labels=[label])[0]


def default_horizon(u0, s, ceiling=0.1):
    """min(ceiling, 0.5 / ||u0||_{H^s}, SHOCK_FRACTION * T*).

    T* = 1 / (3 max(-u0')) is the Burgers breaking time of the datum.
    """
    c = transform_forward(u0).coeffs
    weights = (1.0 + u0.grid.frequencies**2) ** s
    norm = float(np.sqrt(u0.grid.period * np.sum(weights * np.abs(c) ** 2)))
    horizon = ceiling if norm == 0.0 else min(ceiling, 0.5 / norm)
    steepest = steepest_descent(u0)
    if steepest > 0.0:
        horizon = min(horizon, SHOCK_FRACTION / (3.0 * steepest))
    return horizon


def with_horizon(control, u0s):
    """`control` with t_end filled from the data when it is None."""
    if control.t_end is not None:
        return control
    t_end = min(default_horizon(u0, control.cap_index) for u0 in u0s)
    logger.info("horizon t_end=%.6g from the initial data", t_end)
    return control.replace(t_end=t_end)

