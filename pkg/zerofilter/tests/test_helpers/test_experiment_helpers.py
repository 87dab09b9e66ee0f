import numpy as np
import pytest

from zerofilter.helpers import experiment_helpers
from zerofilter.helpers.lp_helpers import hs_value
from zerofilter.models.grid import Grid
from zerofilter.models.params import StepControl
from zerofilter.models.sweep import InitialDatum, SweepConfig
from zerofilter.utils import ConfigError, FitError

SMALL_ALPHAS = (0.2, 0.1, 0.05, 0.025)


def _small_config(datum="band_limited", t_end=0.05, **changes):
    values = dict(
        datum=InitialDatum.parse(datum),
        alphas=SMALL_ALPHAS,
        ns=(2, 3),
        n_points=64,
        control=StepControl(t_end=t_end),
    )
    values.update(changes)
    return SweepConfig(**values)


@pytest.fixture(scope="module")
def band_limited_report():
    return experiment_helpers.run_sweep(_small_config())


@pytest.fixture(scope="module")
def rough_runs():
    cfg = _small_config("rough:s=2,seed=3", t_end=0.02)
    return cfg, experiment_helpers.run_all(cfg)


# ========================
# Initial data
# ========================


def test_band_limited_datum(grid):
    u = experiment_helpers.synth_initial(InitialDatum(), grid)
    expected = np.sin(grid.nodes) + 0.5 * np.cos(2.0 * grid.nodes)
    np.testing.assert_allclose(u.samples, expected, atol=1e-14)


def test_rough_datum_is_normalized(grid):
    u = experiment_helpers.synth_initial(InitialDatum.parse("rough:s=2"), grid)
    assert hs_value(u, 2.0) == pytest.approx(1.0, rel=1e-12)


def test_peakon_datum_is_mollified():
    grid = Grid(256, 4.0 * np.pi)
    u = experiment_helpers.synth_initial(InitialDatum.parse("peakon:alpha=0.5"), grid)
    assert 0.0 < u.max_abs() < 1.0


def test_peakon_datum_needs_positive_width(grid):
    with pytest.raises(ConfigError):
        experiment_helpers.synth_initial(InitialDatum.parse("peakon:alpha=0"), grid)


# ========================
# Scaling fits
# ========================


def test_fit_scaling_recovers_exponents():
    points = [(3.0 * a**2 * 2.0**n, a, n) for a in (0.2, 0.1, 0.05) for n in (2, 3)]
    fit = experiment_helpers.fit_scaling(points)
    assert fit.exponent("alpha") == pytest.approx(2.0, abs=1e-10)
    assert fit.exponent("n") == pytest.approx(1.0, abs=1e-10)
    assert fit.constant == pytest.approx(3.0, rel=1e-10)
    assert fit.r_squared == pytest.approx(1.0)
    assert fit.n_samples == 6


def test_fit_scaling_alpha_only():
    points = [(a**1.5, a, 0) for a in SMALL_ALPHAS]
    fit = experiment_helpers.fit_scaling(points, fit_n=False)
    assert fit.exponent("alpha") == pytest.approx(1.5, abs=1e-10)
    assert fit.exponent("n") == 0.0


def test_fit_scaling_rejects_bad_input():
    with pytest.raises(FitError):
        experiment_helpers.fit_scaling([(1.0, 0.1, 1), (2.0, 0.2, 2), (3.0, 0.3, 3)])
    with pytest.raises(FitError):
        experiment_helpers.fit_scaling(
            [(1.0, 0.1, 1), (0.0, 0.2, 2), (3.0, 0.3, 3), (4.0, 0.4, 4)]
        )


# ========================
# Sweep
# ========================


def test_sweep_on_band_limited_datum(band_limited_report):
    report = band_limited_report
    assert len(report.rows) == len(SMALL_ALPHAS) * 3
    assert report.step2 is None and report.final is None
    assert "step2" in report.skipped and "final" in report.skipped
    assert set(report.verdicts) == {"uniform", "step3", "convergence"}
    assert len(report.trajectories) == len(SMALL_ALPHAS) + 1
    assert tuple(report.convergence.errors) == SMALL_ALPHAS
    assert report.convergence.monotone
    assert report.step3.initial_max == 0.0
    assert report.step3.min_interpolation_deficit >= -1e-12


def test_error_rows_carry_run_status(band_limited_report):
    for row in band_limited_report.rows:
        assert row.status.startswith("completed")
        assert row.t_end == 0.05


def test_triangle_inequality_holds(rough_runs):
    cfg, runs = rough_runs
    for run in runs:
        for n in cfg.ns:
            split = experiment_helpers.decompose(run, n, cfg.s, cfg.grid)
            for index in (cfg.s - 1.0, cfg.s, cfg.s + 1.0):
                assert split.triangle_defect(index) <= 1e-12


def test_step2_initial_constants_are_one(rough_runs):
    cfg, runs = rough_runs
    report = experiment_helpers.step2_probe(cfg, runs)
    assert set(report.initial_constants) == {
        (a, n) for a in (0.0, *SMALL_ALPHAS) for n in cfg.ns
    }
    for value in report.initial_constants.values():
        assert value == pytest.approx(1.0, abs=1e-12)


@pytest.mark.slow
def test_convergence_ratios_on_the_sine():
    cfg = _small_config("sine", t_end=0.1, n_points=512)
    report = experiment_helpers.zero_filter_convergence(cfg)
    assert report.monotone
    for ratio in report.ratios:
        assert 3.0 <= ratio <= 4.6


@pytest.mark.slow
def test_step3_order_in_the_asymptotic_window():
    cfg = _small_config(
        alphas=(0.1, 0.05, 0.025, 0.0125), ns=(3, 4), n_points=128, t_end=0.05
    )
    report = experiment_helpers.step3_probe(cfg)
    assert len(report.window) >= 4
    assert report.conclusive
    assert 1.7 <= report.fit.exponent("alpha") <= 2.3


def test_bona_smith_decompose(rough_runs):
    cfg, _ = rough_runs
    split = experiment_helpers.bona_smith_decompose(cfg, 0.1, 2)
    assert split.alpha == 0.1 and split.n == 2
    assert split.tail > 0.0
    assert split.term_middle[0] == 0.0
    assert len(split.times) == len(split.total)
    assert split.times[-1] == pytest.approx(0.02)


def test_final_bound_cells(rough_runs):
    cfg, runs = rough_runs
    terms = {
        (run.alpha, n): experiment_helpers.decompose(run, n, cfg.s, cfg.grid)
        for run in runs
        for n in cfg.ns
    }
    step2 = experiment_helpers.step2_probe(cfg, runs, terms)
    step3 = experiment_helpers.step3_probe(cfg, runs, terms)
    convergence = experiment_helpers.zero_filter_convergence(cfg, runs)
    report = experiment_helpers.final_bound_check(cfg, step2, step3, terms, convergence)
    assert len(report.cells) == len(SMALL_ALPHAS) * len(cfg.ns)
    assert report.c1 == max(cell.c1 for cell in report.cells)
    assert report.c2 > 0.0
    only = experiment_helpers.final_bound_check(
        cfg, step2, step3, terms, convergence, alpha=0.1, n=3
    )
    assert [(c.alpha, c.n) for c in only.cells] == [(0.1, 3)]
    assert all(cell.model > 0.0 for cell in report.cells)


def test_probes_pass_on_the_rough_datum(rough_runs):
    cfg, runs = rough_runs
    terms = {
        (run.alpha, n): experiment_helpers.decompose(run, n, cfg.s, cfg.grid)
        for run in runs
        for n in cfg.ns
    }
    step2 = experiment_helpers.step2_probe(cfg, runs, terms)
    assert step2.passed
    assert step2.n_growth <= experiment_helpers.STEP2_SPREAD
    step3 = experiment_helpers.step3_probe(cfg, runs, terms)
    convergence = experiment_helpers.zero_filter_convergence(cfg, runs)
    final = experiment_helpers.final_bound_check(cfg, step2, step3, terms, convergence)
    assert final.passed
    assert final.tracking == final.cells[0].ratio
    assert (final.cells[0].alpha, final.cells[0].n) == (SMALL_ALPHAS[0], cfg.ns[0])
    # C1 follows the step 2 fit at each cell
    for cell in final.cells:
        assert cell.c1 == pytest.approx(step2.fit.predict(cell.alpha, cell.n))


def test_convergence_on_the_rough_datum(rough_runs):
    cfg, runs = rough_runs
    report = experiment_helpers.zero_filter_convergence(cfg, runs)
    assert report.fit is None
    assert report.monotone
    assert all(ratio > 1.0 for ratio in report.ratios)
    errors = [report.errors[a] for a in SMALL_ALPHAS]
    assert report.passed == (errors[-1] < errors[0] / 4.0)


def test_uniform_bound_passes_on_the_band_limited_datum(band_limited_report):
    uniform = band_limited_report.uniform
    assert uniform.passed
    assert not uniform.growth_trend
    assert uniform.spread <= experiment_helpers.UNIFORM_SPREAD
    assert set(uniform.higher_suprema) == set(SMALL_ALPHAS)


def test_growth_trend():
    assert experiment_helpers._growth_trend([1.0, 1.1, 1.3, 1.6])
    # slowing growth settles to a limit
    assert not experiment_helpers._growth_trend([1.0, 1.4, 1.6, 1.7])
    assert not experiment_helpers._growth_trend([1.0, 1.0, 1.1, 1.3])
    assert not experiment_helpers._growth_trend([1.0, 1.1])
    assert not experiment_helpers._growth_trend([1.0, 1.0 + 1e-5, 1.0 + 3e-5])


def test_unset_horizon_comes_from_the_datum():
    cfg = _small_config("sine", t_end=None)
    resolved = experiment_helpers.resolve_horizon(cfg)
    assert resolved.control.t_end == pytest.approx(0.25 / 3.0)
    assert resolved.control.norm_indices == (2.0, 1.0)
    fixed = _small_config()
    assert experiment_helpers.resolve_horizon(fixed) is fixed


def test_sweep_reports_the_boundary_tail(band_limited_report):
    tail = band_limited_report.boundary_tail
    assert tail is not None and 0.0 <= tail <= 1.5
