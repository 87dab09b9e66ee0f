import os

import click

from zerofilter.helpers.dynamics_helpers import solve
from zerofilter.helpers.experiment_helpers import synth_initial
from zerofilter.helpers.io_helpers import load_config, write_norms_csv, write_snapshot
from zerofilter.helpers.spectral_helpers import boundary_tail
from zerofilter.models import logger
from zerofilter.utils import (
    EXIT_OK,
    ZeroFilterError,
    error_response,
    exit_code_for,
    resolve_output_dir,
)


@click.command("solve")
@click.option("--config", "config_path", type=click.Path(dir_okay=False))
@click.option("--out", "out_dir", type=click.Path(file_okay=False))
@click.pass_context
def solve_cmd(ctx, config_path, out_dir):
    """Single run from the config: snapshots plus a norms CSV."""
    try:
        cfg = load_config(config_path)
        out_dir = resolve_output_dir(out_dir, cfg.output.dir)
        u0 = synth_initial(cfg.datum, cfg.grid)
        label = f"solve/{cfg.datum}/alpha={cfg.model.alpha:g}"
        trajectory = solve(u0, cfg.model, cfg.run_control(), label=label)
        os.makedirs(out_dir, exist_ok=True)
        for index, field in enumerate(trajectory.fields):
            write_snapshot(field, os.path.join(out_dir, f"u_{index:05d}.chs"))
        norms_path = write_norms_csv(trajectory, out_dir)
        tail = max(boundary_tail(field) for field in trajectory.fields)
    except (ZeroFilterError, OSError) as exc:
        ctx.exit(error_response(str(exc), exit_code_for(exc)))
    logger.info("solve wrote %d snapshots to %s", len(trajectory), out_dir)
    click.echo(f"status: {trajectory.status}")
    click.echo(f"snapshots: {len(trajectory)}")
    click.echo(f"t_end: {trajectory.times[-1]:.6g}")
    click.echo(f"boundary tail: {tail:.3e}")
    click.echo(f"norms: {norms_path}")
    ctx.exit(EXIT_OK)
