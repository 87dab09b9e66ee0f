import numpy as np
import pytest

from zerofilter.helpers import spectral_helpers
from zerofilter.models.grid import Field, Grid, Spectrum
from zerofilter.utils import InvalidFieldError, NonRealSpectrumError


def _band_limited(grid):
    return Field.from_function(
        grid, lambda x: np.sin(x) + 0.5 * np.cos(2.0 * x) + 0.25 * np.sin(5.0 * x)
    )


def test_round_trip(sine):
    back = spectral_helpers.transform_inverse(spectral_helpers.transform_forward(sine))
    np.testing.assert_allclose(back.samples, sine.samples, atol=1e-14)


def test_forward_rejects_non_finite(grid):
    bad = Field(grid, np.full(grid.n_points, np.inf))
    with pytest.raises(InvalidFieldError):
        spectral_helpers.transform_forward(bad)


def test_inverse_rejects_complex_spectrum(grid):
    coeffs = np.zeros(grid.n_points, dtype=complex)
    coeffs[1] = 1.0
    with pytest.raises(NonRealSpectrumError):
        spectral_helpers.transform_inverse(Spectrum(grid, coeffs))


def test_multiplier_must_be_finite(sine):
    spectrum = spectral_helpers.transform_forward(sine)
    with pytest.raises(ValueError):
        spectral_helpers.apply_multiplier(spectrum, lambda xi: 1.0 / xi)


def test_derivatives_of_sine(sine):
    x = sine.grid.nodes
    first = spectral_helpers.derivative(sine)
    second = spectral_helpers.derivative(sine, 2)
    np.testing.assert_allclose(first.samples, np.cos(x), atol=1e-12)
    np.testing.assert_allclose(second.samples, -np.sin(x), atol=1e-12)
    with pytest.raises(ValueError):
        spectral_helpers.derivative(sine, 0)


def test_helmholtz_inverse_on_a_mode(sine):
    out = spectral_helpers.helmholtz_inverse(sine, 0.5)
    np.testing.assert_allclose(out.samples, sine.samples / 1.25, atol=1e-14)
    assert spectral_helpers.helmholtz_inverse(sine, 0.0) is sine
    with pytest.raises(ValueError):
        spectral_helpers.helmholtz_inverse(sine, -0.1)


def test_fractional_laplacian(grid):
    f = Field.from_function(grid, lambda x: np.sin(3.0 * x))
    out = spectral_helpers.fractional_laplacian(f, 1.0)
    np.testing.assert_allclose(out.samples, 3.0 * f.samples, atol=1e-12)
    with pytest.raises(ValueError):
        spectral_helpers.fractional_laplacian(f, 2.5)


def test_bessel_potential(sine):
    # (1 + xi^2)^(s/2) = 2 at xi = 1, s = 2
    out = spectral_helpers.js_operator(sine, 2.0)
    np.testing.assert_allclose(out.samples, 2.0 * sine.samples, atol=1e-13)


def test_dealias_zeroes_the_top_third(grid):
    coeffs = np.ones(grid.n_points, dtype=complex)
    out = spectral_helpers.dealias(Spectrum(grid, coeffs))
    k = np.abs(grid.wavenumbers)
    assert np.all(out.coeffs[3 * k > grid.n_points] == 0)
    assert np.all(out.coeffs[3 * k <= grid.n_points] == 1)


def test_shift_translates(sine):
    out = spectral_helpers.spectral_shift(sine, np.pi / 2)
    np.testing.assert_allclose(out.samples, -np.cos(sine.grid.nodes), atol=1e-13)


def test_interpolate_and_evaluate(grid):
    f = _band_limited(grid)
    fine = spectral_helpers.interpolate(f, 4)
    assert fine.grid.n_points == 4 * grid.n_points
    expected = _band_limited(fine.grid)
    np.testing.assert_allclose(fine.samples, expected.samples, atol=1e-13)

    x = np.random.default_rng(0).uniform(0.0, 2.0 * np.pi, 50)
    exact = np.sin(x) + 0.5 * np.cos(2.0 * x) + 0.25 * np.sin(5.0 * x)
    np.testing.assert_allclose(spectral_helpers.evaluate(f, x), exact, atol=1e-12)
    slope = np.cos(x) - np.sin(2.0 * x) + 1.25 * np.cos(5.0 * x)
    np.testing.assert_allclose(
        spectral_helpers.evaluate(f, x, order=1, chunk=7), slope, atol=1e-12
    )


def test_boundary_tail_of_localized_bump():
    grid = Grid(128, period=40.0)
    bump = Field.from_function(grid, lambda x: np.exp(-((x - 20.0) ** 2)))
    assert spectral_helpers.boundary_tail(bump) < 1e-12
    assert spectral_helpers.boundary_tail(bump, center=0.0) == pytest.approx(1.0)


@pytest.mark.parametrize("alpha", [0.05, 0.1, 0.3, 0.5, 0.9])
def test_green_convolution_matches_multiplier(fine_grid, alpha):
    """Direct quadrature against the periodized kernel equals the multiplier."""
    f = _band_limited(fine_grid)
    direct = spectral_helpers.green_convolve(f, alpha)
    spectral = spectral_helpers.helmholtz_inverse(f, alpha)
    error = np.max(np.abs(direct.samples - spectral.samples))
    assert error <= 1e-10 * np.max(np.abs(spectral.samples))


def test_helmholtz_operator_inverts(fine_grid):
    f = _band_limited(fine_grid)
    for alpha in (0.05, 0.1, 0.3, 0.5, 0.9):
        smoothed = spectral_helpers.transform_forward(
            spectral_helpers.helmholtz_inverse(f, alpha)
        )
        symbol = 1.0 / spectral_helpers.helmholtz_symbol(fine_grid, alpha)
        restored = spectral_helpers.transform_inverse(
            spectral_helpers.apply_multiplier(smoothed, symbol)
        )
        np.testing.assert_allclose(restored.samples, f.samples, atol=1e-12)


def test_green_convolution_needs_resolved_kernel(grid, sine):
    with pytest.raises(ValueError):
        spectral_helpers.green_convolve(sine, 0.001)
    with pytest.raises(ValueError):
        spectral_helpers.green_convolve(sine, 0.0)


def test_periodized_kernel_has_unit_mass(fine_grid):
    kernel = spectral_helpers.periodized_kernel(fine_grid, 0.3)
    # trapezoid mass of a kinked kernel is 1 + O(h^2)
    assert kernel.sum() * fine_grid.spacing == pytest.approx(1.0, rel=1e-3)


def test_kernel_truncation_warns():
    grid = Grid(64, period=0.01)
    with pytest.warns(RuntimeWarning):
        spectral_helpers.periodized_kernel(grid, 10.0)


def test_circular_convolution_is_the_product_spectrum(grid):
    rng = np.random.default_rng(1)
    u = Field(grid, rng.standard_normal(grid.n_points))
    v = Field(grid, rng.standard_normal(grid.n_points))
    a = spectral_helpers.transform_forward(u).coeffs
    b = spectral_helpers.transform_forward(v).coeffs
    expected = spectral_helpers.transform_forward(u * v).coeffs
    np.testing.assert_allclose(
        spectral_helpers.circular_convolve(a, b), expected, atol=1e-13
    )
