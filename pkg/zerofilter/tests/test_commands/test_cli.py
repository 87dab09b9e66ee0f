import json
import logging
import math
import os

import pytest

from zerofilter import VERSION
from zerofilter.app import cli, cli_main, configure_logging
from zerofilter.helpers.io_helpers import write_snapshot
from zerofilter.utils import error_response

SMALL_RUN = """
[grid]
n_points = 32
[time]
t_end = 0.02
[sweep]
ns = 1, 2
"""

SMALL_SWEEP = """
[grid]
n_points = 64
[time]
t_end = 0.05
[sweep]
alphas = 0.2, 0.1, 0.05, 0.025
ns = 2, 3
"""


def test_version(capsys):
    assert cli_main(["--version"]) == 0
    assert VERSION in capsys.readouterr().out


def test_unknown_command_is_a_usage_error():
    assert cli_main(["bogus"]) == 2


def test_error_response(capsys):
    assert error_response("no such thing", 2) == 2
    assert "error: no such thing" in capsys.readouterr().err


def test_invalid_log_level_warns(monkeypatch):
    monkeypatch.setenv("ZEROFILTER_LOG_LEVEL", "chatty")
    with pytest.warns(RuntimeWarning):
        assert configure_logging() == logging.WARNING
    monkeypatch.setenv("ZEROFILTER_LOG_LEVEL", "debug")
    assert configure_logging() == logging.DEBUG
    monkeypatch.delenv("ZEROFILTER_LOG_LEVEL")
    assert configure_logging() == logging.WARNING


def test_verify_spectral(runner):
    result = runner.invoke(cli, ["verify", "--suite", "spectral"])
    assert result.exit_code == 0, result.output
    assert "spectral [ok] parseval" in result.stdout
    assert "FAIL" not in result.stdout


@pytest.mark.slow
def test_verify_oracle(runner):
    result = runner.invoke(cli, ["verify", "--suite", "oracle"])
    assert result.exit_code == 0, result.output
    assert "oracle [ok]" in result.stdout
    assert "FAIL" not in result.stdout


def test_verify_rejects_unknown_suite(runner):
    result = runner.invoke(cli, ["verify", "--suite", "everything"])
    assert result.exit_code == 2


def test_norms_of_a_sine(runner, tmp_path, sine):
    path = str(tmp_path / "sine.chs")
    write_snapshot(sine, path)
    result = runner.invoke(cli, ["norms", "--snapshot", path])
    assert result.exit_code == 0, result.output
    assert float(result.stdout.strip()) == pytest.approx(
        math.sqrt(4.0 * math.pi), rel=1e-12
    )

    result = runner.invoke(cli, ["norms", "--snapshot", path, "--s", "0", "--blocks"])
    assert result.exit_code == 0
    lines = result.stdout.splitlines()
    assert float(lines[0]) == pytest.approx(math.sqrt(math.pi), rel=1e-12)
    assert lines[1].startswith("block -1:")


def test_norms_of_a_missing_snapshot(runner, tmp_path):
    result = runner.invoke(cli, ["norms", "--snapshot", str(tmp_path / "none.chs")])
    assert result.exit_code == 2


def test_solve_writes_snapshots(runner, write_config, out_dir):
    config = write_config(SMALL_RUN)
    result = runner.invoke(cli, ["solve", "--config", config, "--out", out_dir])
    assert result.exit_code == 0, result.output
    assert "status: completed" in result.stdout
    names = os.listdir(out_dir)
    assert "u_00000.chs" in names
    assert any(name.startswith("norms_") for name in names)


def test_solve_uses_the_output_environment(runner, write_config, tmp_path, monkeypatch):
    target = tmp_path / "from-env"
    monkeypatch.setenv("ZEROFILTER_OUTPUT_DIR", str(target))
    result = runner.invoke(cli, ["solve", "--config", write_config(SMALL_RUN)])
    assert result.exit_code == 0, result.output
    assert (target / "u_00000.chs").exists()


def test_solve_with_a_bad_config(runner, write_config):
    config = write_config("[model]\nalpha = 2\n")
    result = runner.invoke(cli, ["solve", "--config", config])
    assert result.exit_code == 2
    assert "line 2" in result.stderr


def test_sweep_writes_every_report(runner, write_config, out_dir):
    config = write_config(SMALL_SWEEP)
    result = runner.invoke(cli, ["sweep", "--config", config, "--out", out_dir])
    assert result.exit_code == 0, result.output
    assert "step2: skipped" in result.stdout
    assert "boundary tail:" in result.stdout
    with open(os.path.join(out_dir, "summary.json")) as handle:
        summary = json.load(handle)
    assert summary["passed"]
    assert summary["config"]["t_end"] == 0.05
    assert "boundary_tail" in summary
    assert os.path.exists(os.path.join(out_dir, "errors.csv"))
    assert os.path.exists(os.path.join(out_dir, "plot.gp"))


@pytest.mark.slow
@pytest.mark.parametrize("datum", ["sine", "band_limited"])
def test_default_sweep_passes_on_smooth_data(runner, write_config, out_dir, datum):
    config = write_config(f"[data]\nu0 = {datum}\n")
    result = runner.invoke(cli, ["sweep", "--config", config, "--out", out_dir])
    with open(os.path.join(out_dir, "summary.json")) as handle:
        summary = json.load(handle)
    assert summary["passed"], summary["verdicts"]
    assert result.exit_code == 0, result.output
    # horizon taken from the datum: a quarter of the Burgers breaking time
    assert 0.0 < summary["config"]["t_end"] < 0.1
    assert summary["convergence"]["fit"]["exponents"]["alpha"] >= 1.5


def test_sweep_with_an_invalid_config(runner, write_config, out_dir):
    config = write_config("[sweep]\nsobolev_s = 1\n")
    result = runner.invoke(cli, ["sweep", "--config", config, "--out", out_dir])
    assert result.exit_code == 2
    assert not os.path.exists(out_dir)


def test_oracle_characteristics(runner, write_config, out_dir):
    config = write_config("[grid]\nn_points = 32\n[sweep]\nns = 1, 2\n")
    args = ["oracle", "--kind", "characteristics", "--config", config]
    result = runner.invoke(cli, args + ["--out", out_dir])
    assert result.exit_code == 0, result.output
    assert "shock time" in result.stdout
    assert len(os.listdir(out_dir)) == 5


def test_oracle_past_the_shock(runner, write_config, out_dir):
    text = "[grid]\nn_points = 32\n[time]\nt_end = 0.5\n[sweep]\nns = 1\n"
    config = write_config(text)
    args = ["oracle", "--kind", "characteristics", "--config", config]
    result = runner.invoke(cli, args + ["--out", out_dir])
    assert result.exit_code == 2


def test_oracle_peakon_needs_a_width(runner, write_config, out_dir):
    config = write_config("[model]\nalpha = 0\n")
    args = ["oracle", "--kind", "peakon", "--config", config, "--out", out_dir]
    assert runner.invoke(cli, args).exit_code == 2

    config = write_config("[data]\nu0 = peakon:alpha=0.5\n", name="peakon.ini")
    args = ["oracle", "--kind", "peakon", "--config", config, "--out", out_dir]
    result = runner.invoke(cli, args + ["--samples", "3"])
    assert result.exit_code == 0, result.output
    assert sorted(os.listdir(out_dir))[-1] == "peakon_00002.chs"
