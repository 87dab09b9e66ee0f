import click

from zerofilter.helpers.io_helpers import read_snapshot
from zerofilter.helpers.lp_helpers import hs_norm
from zerofilter.utils import (
    EXIT_OK,
    ZeroFilterError,
    error_response,
    exit_code_for,
)


@click.command("norms")
@click.option(
    "--snapshot", "snapshot_path", required=True, type=click.Path(dir_okay=False)
)
@click.option("--s", "s", type=float, default=2.0, show_default=True)
@click.option("--blocks", is_flag=True, help="Also print per-block L2 norms.")
@click.pass_context
def norms_cmd(ctx, snapshot_path, s, blocks):
    """Print the H^s norm of a snapshot."""
    try:
        report = hs_norm(read_snapshot(snapshot_path), s)
    except (ZeroFilterError, OSError) as exc:
        ctx.exit(error_response(str(exc), exit_code_for(exc)))
    click.echo(repr(report.value))
    if blocks:
        for q, value in enumerate(report.tail_profile, start=-1):
            click.echo(f"block {q}: {value!r}")
    ctx.exit(EXIT_OK)
