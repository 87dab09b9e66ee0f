import numpy as np
import pytest

from zerofilter.models.grid import Field, Grid, Spectrum


def test_grid_rejects_bad_sizes():
    for n in (4, 6, 12, 100):
        with pytest.raises(ValueError):
            Grid(n)
    with pytest.raises(ValueError):
        Grid(16, period=0.0)
    with pytest.raises(ValueError):
        Grid(16, period=float("inf"))


def test_wavenumbers_in_fft_order():
    grid = Grid(8)
    assert list(grid.wavenumbers) == [0, 1, 2, 3, -4, -3, -2, -1]
    assert grid.nyquist_index == 4


def test_dealias_mask_keeps_two_thirds():
    grid = Grid(8)
    # |k| <= 8/3
    expected = [True, True, True, False, False, False, True, True]
    assert list(grid.dealias_mask) == expected


def test_nodes_are_half_open():
    grid = Grid(16, period=4.0)
    assert grid.nodes[0] == 0.0
    assert grid.nodes[-1] == pytest.approx(4.0 - grid.spacing)
    assert grid.spacing == 0.25


def test_frequencies_and_max_frequency():
    grid = Grid(64)
    assert grid.max_frequency == pytest.approx(32.0)
    np.testing.assert_allclose(grid.frequencies[:3], [0.0, 1.0, 2.0])
    wide = Grid(64, period=4.0 * np.pi)
    np.testing.assert_allclose(wide.frequencies[:3], [0.0, 0.5, 1.0])


def test_grid_arrays_are_read_only(grid):
    with pytest.raises(ValueError):
        grid.nodes[0] = 1.0


def test_field_validation(grid):
    with pytest.raises(ValueError):
        Field(grid, np.zeros(grid.n_points + 1))
    f = Field(grid, np.zeros(grid.n_points))
    with pytest.raises(ValueError):
        f.samples[0] = 1.0
    assert f.is_valid
    assert not Field(grid, np.full(grid.n_points, np.nan)).is_valid


def test_field_arithmetic_keeps_metadata(sine):
    f = sine.with_meta(time=0.5, alpha=0.1)
    total = f + f
    np.testing.assert_allclose(total.samples, 2.0 * sine.samples)
    assert total.time == 0.5 and total.alpha == 0.1
    np.testing.assert_allclose((f - f).samples, 0.0)
    np.testing.assert_allclose((2.0 * f).samples, (f * 2.0).samples)
    np.testing.assert_allclose((-f).samples, -sine.samples)


def test_field_norms(sine):
    assert sine.max_abs() == pytest.approx(1.0)
    assert sine.l2_norm() == pytest.approx(np.sqrt(np.pi))


def test_spectrum_of_real_field_is_hermitian(sine):
    coeffs = np.fft.fft(sine.samples) / sine.grid.n_points
    spectrum = Spectrum(sine.grid, coeffs)
    assert spectrum.hermitian_defect() < 1e-14
    assert spectrum.coeffs[1] == pytest.approx(-0.5j)
    assert spectrum.coeffs[-1] == pytest.approx(0.5j)
    assert spectrum.energy() == pytest.approx(np.pi)


def test_spectrum_of_zero_has_no_defect(grid):
    assert Spectrum(grid, np.zeros(grid.n_points)).hermitian_defect() == 0.0
