import pytest

from zerofilter.helpers import verify_helpers
from zerofilter.models.check import CheckResult


def test_spectral_suite_passes():
    result = verify_helpers.run_suite("spectral")
    assert result.suite == "spectral"
    assert result.passed, [str(check) for check in result.failures]


def test_lp_suite_passes():
    result = verify_helpers.run_suite("lp")
    assert result.passed, [str(check) for check in result.failures]
    assert {check.name for check in result.checks} >= {
        "partition of unity",
        "bernstein ratio",
        "product corpus maximum",
        "commutator corpus maximum",
        "commutator with a constant",
    }
    corpus = next(c for c in result.checks if c.name == "product corpus maximum")
    assert "100 pairs" in corpus.detail
    assert 0.0 < corpus.value < 10.0


@pytest.mark.slow
def test_oracle_suite_passes():
    result = verify_helpers.run_suite("oracle")
    assert result.passed, [str(check) for check in result.failures]
    names = {check.name for check in result.checks}
    assert {"breaking time", "peakon shape", "spectral vs finite differences"} <= names


@pytest.mark.slow
def test_conservation_suite_passes():
    result = verify_helpers.run_suite("conservation")
    assert result.passed, [str(check) for check in result.failures]


def test_unknown_suite():
    with pytest.raises(ValueError):
        verify_helpers.run_suite("nope")


def test_check_result_rendering():
    ok = CheckResult("parseval", 1e-15, 1e-13, True)
    bad = CheckResult("drift", 0.5, 1e-8, False, "t=0.5")
    assert str(ok).startswith("[ok] parseval")
    assert str(bad).startswith("[FAIL] drift")
    assert str(bad).endswith("t=0.5")


def test_smooth_random_field_is_seeded(grid):
    a = verify_helpers.smooth_random_field(grid, 3)
    b = verify_helpers.smooth_random_field(grid, 3)
    c = verify_helpers.smooth_random_field(grid, 4)
    assert a.samples.tobytes() == b.samples.tobytes()
    assert a.samples.tobytes() != c.samples.tobytes()
