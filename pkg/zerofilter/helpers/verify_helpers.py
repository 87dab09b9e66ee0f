"""Self-checks behind `verify --suite`: identities, oracles, invariants."""

import math

import numpy as np

from zerofilter.helpers.dynamics_helpers import (
    difference_residual_v,
    difference_residual_w,
    rhs_burgers,
    rhs_ch,
    rhs_equivalent_form,
    solve,
)
from zerofilter.helpers.lp_helpers import (
    bernstein_probe,
    commutator_probe,
    corpus_maximum,
    cutoff_symbol,
    interpolation_check,
    product_probe,
    rough_coefficients,
    rough_pairs,
    synthetic_rough,
    tail_norm,
)
from zerofilter.helpers.oracle_helpers import (
    characteristic_field,
    characteristic_solution_from_function,
    energy_ch,
    fd_reference,
    peakon_energy_exact,
    peakon_field,
    peakon_shape_error,
    shock_time,
)
from zerofilter.helpers.spectral_helpers import (
    apply_multiplier,
    green_convolve,
    helmholtz_inverse,
    helmholtz_symbol,
    transform_forward,
    transform_inverse,
)
from zerofilter.models import logger
from zerofilter.models.check import SUITES, CheckResult, SuiteResult
from zerofilter.models.grid import Field, Grid, Spectrum
from zerofilter.models.params import ModelParams, StepControl
from zerofilter.models.partition import DyadicPartition
from zerofilter.models.trajectory import BREAKING

GREEN_ALPHAS = (0.05, 0.1, 0.3, 0.5, 0.9)
RHS_ALPHAS = (0.0, 0.1, 0.5, 0.9)
LP_INDICES = (1.6, 2.0, 2.5)
RANDOM_FIELDS = 100
RANDOM_MODES = 8
CORPUS_PAIRS = 100
CORPUS_CEILING = float(np.finfo(float).max)


def _check(name, value, tolerance, detail=""):
    result = CheckResult(
        name=name,
        value=float(value),
        tolerance=float(tolerance),
        passed=bool(value <= tolerance),
        detail=detail,
    )
    logger.info("%s", result)
    return result


def _relative(a, b):
    """max |a - b| / max(1, max |b|) over sample arrays."""
    scale = max(1.0, float(np.max(np.abs(b))))
    return float(np.max(np.abs(a - b))) / scale


def smooth_random_field(grid, seed, modes=RANDOM_MODES):
    """Seeded trigonometric polynomial of degree `modes` with decaying spectrum."""
    rng = np.random.default_rng(seed)
    coeffs = np.zeros(grid.n_points, dtype=complex)
    k = np.arange(1, modes + 1)
    size = k.size
    coeffs[k] = (rng.standard_normal(size) + 1j * rng.standard_normal(size)) * (
        0.5 * np.exp(-0.3 * k)
    )
    coeffs[-k] = np.conj(coeffs[k])
    coeffs[0] = 0.5 * rng.standard_normal()
    return transform_inverse(Spectrum(grid, coeffs))


def _band_limited(grid):
    return Field.from_function(
        grid, lambda x: np.sin(x) + 0.5 * np.cos(2.0 * x) + 0.25 * np.sin(5.0 * x)
    )


# ========================
# Suites
# ========================


def spectral_suite():
    grid = Grid(256)
    u = _band_limited(grid)
    checks = []

    spectrum = transform_forward(u)
    back = transform_inverse(spectrum)
    checks.append(
        _check("transform round trip", _relative(back.samples, u.samples), 1e-13)
    )
    parseval = abs(spectrum.energy() - u.l2_norm() ** 2) / u.l2_norm() ** 2
    checks.append(_check("parseval", parseval, 1e-13))

    green = max(
        _relative(green_convolve(u, a).samples, helmholtz_inverse(u, a).samples)
        for a in GREEN_ALPHAS
    )
    checks.append(
        _check("helmholtz inverse vs green convolution", green, 1e-10, "5 alphas")
    )

    identity = 0.0
    for alpha in GREEN_ALPHAS:
        smoothed = transform_forward(helmholtz_inverse(u, alpha))
        restored = apply_multiplier(smoothed, 1.0 / helmholtz_symbol(grid, alpha))
        identity = max(
            identity, _relative(transform_inverse(restored).samples, u.samples)
        )
    checks.append(_check("helmholtz operator times inverse", identity, 1e-12))

    small = Grid(64)
    fields = [smooth_random_field(small, seed) for seed in range(RANDOM_FIELDS)]
    equivalent = 0.0
    for alpha in RHS_ALPHAS:
        params = ModelParams(alpha=alpha)
        for f in fields:
            equivalent = max(
                equivalent,
                _relative(
                    rhs_ch(f, params).samples, rhs_equivalent_form(f, params).samples
                ),
            )
    checks.append(
        _check("rhs forms agree", equivalent, 1e-11, f"{RANDOM_FIELDS} fields")
    )
    burgers = max(
        _relative(
            rhs_ch(f, ModelParams(alpha=0.0)).samples,
            rhs_burgers(f, ModelParams(alpha=0.0)).samples,
        )
        for f in fields
    )
    checks.append(_check("alpha = 0 is burgers", burgers, 1e-12))

    residual = 0.0
    for alpha in RHS_ALPHAS[1:]:
        params = ModelParams(alpha=alpha, nu=0.05)
        for a, b in zip(fields[:10], fields[10:20]):
            residual = max(
                residual,
                difference_residual_v(a, b, params),
                difference_residual_w(a, b, params),
            )
    checks.append(_check("difference equations", residual, 1e-10))
    return SuiteResult("spectral", tuple(checks))


def lp_suite():
    grid = Grid(256)
    partition = DyadicPartition(grid)
    checks = [_check("partition of unity", partition.unity_defect(), 1e-12)]

    s = 2.0
    excess = 0.6
    f = synthetic_rough(grid, s, seed=0, excess=excess)
    levels = range(partition.q_max + 2)
    tails = [tail_norm(f, n, s) for n in levels]
    increases = max(b - a for a, b in zip(tails, tails[1:]))
    checks.append(_check("tail norms non-increasing", increases, 0.0))

    coeffs = rough_coefficients(grid, s, seed=0, excess=excess)
    weights = (1.0 + grid.frequencies**2) ** s
    mismatch = 0.0
    for n, measured in zip(levels, tails):
        removed = 1.0 - cutoff_symbol(grid, n)
        analytic = math.sqrt(
            grid.period * float(np.sum(removed * weights * np.abs(coeffs) ** 2))
        )
        if analytic > 0.0:
            mismatch = max(mismatch, abs(measured - analytic) / analytic)
    checks.append(_check("tail norm vs analytic tail sum", mismatch, 0.05))

    deficit = 0.0
    bernstein = 0.0
    for index in LP_INDICES:
        for seed in range(5):
            g = synthetic_rough(grid, index, seed=seed)
            deficit = max(deficit, -interpolation_check(g, index))
            for n in range(partition.q_max + 2):
                bernstein = max(bernstein, bernstein_probe(g, n, 1, index))
    checks.append(_check("interpolation inequality", deficit, 1e-12))
    checks.append(_check("bernstein ratio", bernstein, 1.0 + 1e-12))

    u, v = synthetic_rough(grid, s, seed=1), synthetic_rough(grid, s, seed=2)
    direct = product_probe(u, v, s, method="direct")
    convolved = product_probe(u, v, s, method="convolution")
    checks.append(
        _check(
            "product norm, pointwise vs convolution",
            abs(direct - convolved) / direct,
            1e-12,
        )
    )

    # corpus maxima are reported; the check only asks that they stay finite
    pairs = rough_pairs(grid, s, CORPUS_PAIRS)
    coarse = rough_pairs(Grid(128), s, CORPUS_PAIRS)
    product = corpus_maximum(product_probe, pairs, s)
    product_coarse = corpus_maximum(product_probe, coarse, s)
    checks.append(
        _check(
            "product corpus maximum",
            product,
            CORPUS_CEILING,
            f"{CORPUS_PAIRS} pairs; N=128 gives {product_coarse:.4g}",
        )
    )
    commutator = corpus_maximum(commutator_probe, pairs, s)
    checks.append(
        _check(
            "commutator corpus maximum",
            commutator,
            CORPUS_CEILING,
            f"{CORPUS_PAIRS} pairs",
        )
    )
    flat = Field.from_function(grid, lambda x: np.full_like(x, 2.0))
    checks.append(
        _check(
            "commutator with a constant",
            commutator_probe(flat, pairs[0][1], s),
            1e-12,
        )
    )
    return SuiteResult("lp", tuple(checks))


def oracle_suite():
    checks = []
    grid = Grid(256)
    sine = Field.from_function(grid, np.sin)
    sol = characteristic_solution_from_function(np.sin, np.cos)
    checks.append(
        _check("shock time of sin", abs(shock_time(sine) - 1.0 / 3.0), 1e-12)
    )

    t_end = 0.2
    burgers = ModelParams(alpha=0.0)
    run = solve(sine, burgers, StepControl(t_end=t_end), label="burgers/sine")
    exact = characteristic_field(sol, grid, t_end)
    checks.append(
        _check(
            "burgers vs characteristics",
            float(np.max(np.abs(run.final.samples - exact.samples))),
            1e-6,
            f"t={t_end}",
        )
    )

    control = StepControl(t_end=0.5)
    broken = solve(sine, burgers, control, "breaking")
    if broken.status.kind == BREAKING:
        miss = abs(broken.status.time - 1.0 / 3.0) * 3.0
        checks.append(_check("breaking time", miss, 0.05, str(broken.status)))
    else:
        checks.append(
            CheckResult("breaking time", math.inf, 0.05, False, str(broken.status))
        )

    wide = Grid(4096, 40.0 * np.pi)
    peakon = peakon_field(1.0, 1.0, 0.0, wide)
    travelled = solve(
        peakon, ModelParams(alpha=1.0), StepControl(t_end=1.0), label="peakon"
    )
    checks.append(
        _check(
            "peakon shape",
            peakon_shape_error(travelled.final, 1.0, 1.0, 1.0),
            2e-2,
            str(travelled.status),
        )
    )

    coarse = Grid(128)
    params = ModelParams(alpha=0.5)
    u0 = Field.from_function(coarse, np.sin)
    spectral = solve(u0, params, StepControl(t_end=0.1), label="ch/sine")
    reference = fd_reference(u0, params, 0.1)
    gap = float(np.max(np.abs(spectral.final.samples - reference.samples)))
    checks.append(_check("spectral vs finite differences", gap, 1e-3))
    return SuiteResult("oracle", tuple(checks))


def _relative_drift(series):
    return float(np.max(np.abs(series - series[0]))) / float(series[0])


def conservation_suite():
    checks = []
    grid = Grid(512)
    u0 = Field.from_function(grid, lambda x: 0.5 * np.sin(x))
    control = StepControl(t_end=0.5, cfl=0.1)
    ch = solve(u0, ModelParams(alpha=0.5), control, label="ch/energy")
    checks.append(
        _check("filtered energy drift", _relative_drift(ch.energy_series), 1e-8)
    )

    sine = Field.from_function(grid, np.sin)
    burgers = solve(
        sine, ModelParams(alpha=0.0), StepControl(t_end=0.2), label="burgers/energy"
    )
    checks.append(
        _check("burgers L2 drift", _relative_drift(burgers.energy_series), 1e-8)
    )

    wide = Grid(4096, 40.0 * np.pi)
    exact = peakon_energy_exact(1.0, 1.0, wide.period)
    discrete = energy_ch(peakon_field(1.0, 1.0, 0.0, wide), 1.0)
    checks.append(
        _check("peakon energy", abs(discrete - exact), 0.02, f"exact {exact:.6g}")
    )
    return SuiteResult("conservation", tuple(checks))


_SUITES = {
    "spectral": spectral_suite,
    "lp": lp_suite,
    "oracle": oracle_suite,
    "conservation": conservation_suite,
}


def run_suite(name):
    if name not in _SUITES:
        raise ValueError(f"unknown suite {name!r}; expected one of {SUITES}")
    logger.info("verify: running the %s suite", name)
    result = _SUITES[name]()
    logger.info(
        "verify %s: %d checks, %d failed",
        name,
        len(result.checks),
        len(result.failures),
    )
    return result
