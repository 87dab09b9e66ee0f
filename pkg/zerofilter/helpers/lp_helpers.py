"""Sobolev norms, Littlewood-Paley blocks and the inequality probes."""

import numpy as np

from zerofilter.helpers.spectral_helpers import (
    _apply,
    circular_convolve,
    derivative,
    js_operator,
    transform_forward,
    transform_inverse,
)
from zerofilter.models import logger
from zerofilter.models.grid import Spectrum
from zerofilter.models.partition import (
    DyadicPartition,
    NormReport,
    sharp_cutoff_symbol,
)
from zerofilter.utils import OutOfRangeError, UndefinedRatioError

CUTOFF_MODES = ("sharp", "smooth")
ROUGH_EXCESS = 0.6


# ========================
# Norms
# ========================


def _hs_from_coeffs(grid, coeffs, s):
    weights = (1.0 + grid.frequencies**2) ** s
    return float(np.sqrt(grid.period * np.sum(weights * np.abs(coeffs) ** 2)))


def hs_value(f, s):
    """||f||_{H^s} without the per-block profile."""
    return _hs_from_coeffs(f.grid, transform_forward(f).coeffs, s)


def hs_norm(f, s):
    grid = f.grid
    coeffs = transform_forward(f).coeffs
    power = np.abs(coeffs) ** 2
    partition = DyadicPartition(grid)
    profile = tuple(
        float(np.sqrt(grid.period * np.sum(symbol**2 * power)))
        for symbol in partition.blocks()
    )
    return NormReport(
        s=float(s), value=_hs_from_coeffs(grid, coeffs, s), tail_profile=profile
    )


def linf_norm(f):
    return f.max_abs()


# ========================
# Blocks and cutoffs
# ========================


def lp_block(f, q):
    partition = DyadicPartition(f.grid)
    if q < -1 or q > partition.q_max:
        raise OutOfRangeError(
            f"block index {q} outside -1..{partition.q_max} on N={f.grid.n_points}"
        )
    return _apply(f, partition.block_symbol(q))


def cutoff_symbol(grid, n, mode="sharp"):
    if n < 0:
        raise ValueError(f"cutoff level must be >= 0, got {n}")
    if mode == "sharp":
        return sharp_cutoff_symbol(grid, n)
    if mode == "smooth":
        return DyadicPartition(grid).cutoff_symbol(n)
    raise ValueError(f"cutoff mode must be one of {CUTOFF_MODES}, got {mode!r}")


def low_cutoff(f, n, mode="sharp"):
    return _apply(f, cutoff_symbol(f.grid, n, mode))


def tail_norm(f, n, s, mode="sharp"):
    """||(Id - S_n) f||_{H^s}."""
    coeffs = transform_forward(f).coeffs
    kept = cutoff_symbol(f.grid, n, mode)
    return _hs_from_coeffs(f.grid, (1.0 - kept) * coeffs, s)


def band_max_frequency(grid, n, mode="sharp"):
    """Largest |xi| on the grid that S_n does not annihilate."""
    symbol = cutoff_symbol(grid, n, mode)
    xi = np.abs(grid.frequencies[symbol > 0])
    return float(xi.max()) if xi.size else 0.0


# ========================
# Synthetic rough data
# ========================


def rough_coefficients(grid, s, seed=0, excess=ROUGH_EXCESS):
    """|c_k| = (1+|xi_k|)^-(s+excess) with seeded phases on the dealiased band.

    The resulting field lies in H^s but not in H^(s + excess - 1/2).
    """
    rng = np.random.default_rng(seed)
    n = grid.n_points
    coeffs = np.zeros(n, dtype=complex)
    top = n // 3
    k = np.arange(1, top + 1)
    xi = 2.0 * np.pi * k / grid.period
    phases = np.exp(2j * np.pi * rng.random(k.size))
    coeffs[k] = (1.0 + xi) ** (-(s + excess)) * phases
    coeffs[-k] = np.conj(coeffs[k])
    coeffs[0] = 1.0
    return coeffs


def synthetic_rough(grid, s, seed=0, excess=ROUGH_EXCESS):
    spectrum = Spectrum(grid, rough_coefficients(grid, s, seed, excess))
    return transform_inverse(spectrum)


# ========================
# Inequality probes
# ========================


def _ratio(numerator, denominator, what):
    if denominator == 0.0:
        raise UndefinedRatioError(f"{what}: denominator vanishes")
    return numerator / denominator


def product_probe(u, v, s, method="direct"):
    """||uv||_{H^s} / (||u||_{H^s} ||v||_{H^s}).

    `method="convolution"` forms the product coefficients by circular
    convolution instead of pointwise multiplication.
    """
    if not s > 0.5:
        raise ValueError(f"product probe needs s > 1/2, got {s}")
    if method == "direct":
        product = _hs_from_coeffs(u.grid, transform_forward(u * v).coeffs, s)
    elif method == "convolution":
        a = transform_forward(u).coeffs
        b = transform_forward(v).coeffs
        product = _hs_from_coeffs(u.grid, circular_convolve(a, b), s)
    else:
        raise ValueError(f"unknown product method {method!r}")
    return _ratio(product, hs_value(u, s) * hs_value(v, s), "product probe")


def algebra_probe(u, v, s):
    """||uv||_{H^s} / (||u||_{H^s} ||v||_inf + ||v||_{H^s} ||u||_inf)."""
    if not s > 0:
        raise ValueError(f"algebra probe needs s > 0, got {s}")
    denominator = hs_value(u, s) * linf_norm(v) + hs_value(v, s) * linf_norm(u)
    return _ratio(hs_value(u * v, s), denominator, "algebra probe")


def commutator_probe(f, g, s):
    """||[J^s, f] g||_{L^2} over the commutator-estimate right-hand side."""
    if not s >= 0:
        raise ValueError(f"commutator probe needs s >= 0, got {s}")
    commutator = js_operator(f * g, s) - f * js_operator(g, s)
    numerator = commutator.l2_norm()
    slope_term = linf_norm(derivative(f)) * hs_value(g, s - 1)
    denominator = slope_term + hs_value(f, s) * linf_norm(g)
    return _ratio(numerator, denominator, "commutator probe")


def interpolation_check(f, s):
    """||f||_{s-1}^(1/2) ||f||_{s+1}^(1/2) - ||f||_s, never below round-off."""
    coeffs = transform_forward(f).coeffs
    if not np.any(coeffs):
        raise ValueError("interpolation check needs a nonzero field")
    lower = _hs_from_coeffs(f.grid, coeffs, s - 1)
    upper = _hs_from_coeffs(f.grid, coeffs, s + 1)
    return float(np.sqrt(lower * upper) - _hs_from_coeffs(f.grid, coeffs, s))


def bernstein_probe(f, n, k, s, mode="sharp"):
    """||S_n f||_{H^(s+k)} / (2^(kn) ||f||_{H^s})."""
    partition = DyadicPartition(f.grid)
    if n < 0 or n > partition.q_max + 1:
        raise OutOfRangeError(f"cutoff level {n} outside 0..{partition.q_max + 1}")
    coeffs = transform_forward(f).coeffs
    low = cutoff_symbol(f.grid, n, mode) * coeffs
    numerator = _hs_from_coeffs(f.grid, low, s + k)
    denominator = 2.0 ** (k * n) * _hs_from_coeffs(f.grid, coeffs, s)
    ratio = _ratio(numerator, denominator, "bernstein probe")
    logger.debug("bernstein probe n=%s k=%s s=%s: %.4g", n, k, s, ratio)
    return ratio


def corpus_maximum(probe, pairs, s):
    """Largest probe ratio over (u, v) pairs."""
    return max(probe(u, v, s) for u, v in pairs)


def rough_pairs(grid, s, count, seed=0):
    return [
        (
            synthetic_rough(grid, s, seed=seed + 2 * i),
            synthetic_rough(grid, s, seed=seed + 2 * i + 1),
        )
        for i in range(count)
    ]

