import os

import click

from zerofilter.helpers.experiment_helpers import run_sweep
from zerofilter.helpers.io_helpers import emit_report, load_config
from zerofilter.models import logger
from zerofilter.utils import (
    EXIT_ASSERTION,
    EXIT_OK,
    EXIT_USAGE,
    ZeroFilterError,
    error_response,
    exit_code_for,
    resolve_output_dir,
)


def _default_jobs(configured):
    value = os.environ.get("ZEROFILTER_JOBS")
    if not value:
        return configured
    try:
        return max(1, int(value))
    except ValueError:
        logger.warning("ignoring ZEROFILTER_JOBS=%r: not an integer", value)
        return configured


@click.command("sweep")
@click.option("--config", "config_path", type=click.Path(dir_okay=False))
@click.option("--out", "out_dir", type=click.Path(file_okay=False))
@click.option("--jobs", type=int, default=None, help="Alphas solved in parallel.")
@click.pass_context
def sweep_cmd(ctx, config_path, out_dir, jobs):
    """Zero-filter study over the alpha grid; writes every report."""
    if jobs is not None and jobs < 1:
        ctx.exit(error_response("--jobs must be >= 1", EXIT_USAGE))
    try:
        cfg = load_config(config_path)
        out_dir = resolve_output_dir(out_dir, cfg.output.dir)
        jobs = jobs or _default_jobs(cfg.sweep.jobs)
        report = run_sweep(cfg.sweep_config(), jobs=jobs)
        emit_report(report, out_dir, cfg.output.formats)
    except (ZeroFilterError, OSError) as exc:
        ctx.exit(error_response(str(exc), exit_code_for(exc)))

    for name, passed in report.verdicts.items():
        click.echo(f"{name}: {'pass' if passed else 'FAIL'}")
    for name, reason in report.skipped.items():
        click.echo(f"{name}: skipped ({reason})")
    click.echo(f"boundary tail: {report.boundary_tail:.3e}")
    if not report.passed:
        failed = [name for name, ok in report.verdicts.items() if not ok]
        ctx.exit(error_response(f"sweep checks failed: {failed}", EXIT_ASSERTION))
    ctx.exit(EXIT_OK)
