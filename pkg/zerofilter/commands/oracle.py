import os

import click
import numpy as np

from zerofilter.helpers.dynamics_helpers import with_horizon
from zerofilter.helpers.experiment_helpers import synth_initial
from zerofilter.helpers.io_helpers import load_config, write_snapshot
from zerofilter.helpers.oracle_helpers import (
    characteristic_field,
    characteristic_solution,
    peakon_field,
)
from zerofilter.models import logger
from zerofilter.utils import (
    EXIT_OK,
    EXIT_USAGE,
    ZeroFilterError,
    error_response,
    exit_code_for,
    resolve_output_dir,
)

KINDS = ("characteristics", "peakon")


def _peakon_shape(cfg):
    """(c, alpha) from a peakon datum, else unit speed at the model alpha."""
    if cfg.datum.kind == "peakon":
        return cfg.datum.option("c"), cfg.datum.option("alpha")
    return 1.0, cfg.model.alpha


@click.command("oracle")
@click.option("--kind", required=True, type=click.Choice(KINDS))
@click.option("--config", "config_path", type=click.Path(dir_okay=False))
@click.option("--out", "out_dir", type=click.Path(file_okay=False))
@click.option("--samples", default=5, show_default=True, help="Snapshot count.")
@click.pass_context
def oracle_cmd(ctx, kind, config_path, out_dir, samples):
    """Reference solutions on [0, t_end] written as snapshots."""
    if samples < 1:
        ctx.exit(error_response("--samples must be >= 1", EXIT_USAGE))
    try:
        cfg = load_config(config_path)
        grid = cfg.grid
        u0 = synth_initial(cfg.datum, grid)
        t_end = with_horizon(cfg.run_control(), [u0]).t_end
        times = np.linspace(0.0, t_end, samples)
        if kind == "characteristics":
            sol = characteristic_solution(u0)
            click.echo(f"shock time: {sol.shock_time!r}")
            fields = [characteristic_field(sol, grid, t) for t in times]
        else:
            c, alpha = _peakon_shape(cfg)
            if not alpha > 0:
                raise ValueError("peakon oracle needs alpha > 0")
            fields = [peakon_field(c, alpha, t, grid) for t in times]
        out_dir = resolve_output_dir(out_dir, cfg.output.dir)
        os.makedirs(out_dir, exist_ok=True)
        for index, field in enumerate(fields):
            write_snapshot(field, os.path.join(out_dir, f"{kind}_{index:05d}.chs"))
    except ValueError as exc:
        ctx.exit(error_response(str(exc), EXIT_USAGE))
    except (ZeroFilterError, OSError) as exc:
        ctx.exit(error_response(str(exc), exit_code_for(exc)))
    logger.info("oracle %s: %d snapshots in %s", kind, len(fields), out_dir)
    click.echo(f"snapshots: {len(fields)} in {out_dir}")
    ctx.exit(EXIT_OK)
