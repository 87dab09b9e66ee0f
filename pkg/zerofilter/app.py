# ========================
# Imports
# ========================
import logging
import os
import sys
import warnings

import click
from dotenv import load_dotenv

from zerofilter import VERSION
from zerofilter.commands.norms import norms_cmd
from zerofilter.commands.oracle import oracle_cmd
from zerofilter.commands.solve import solve_cmd
from zerofilter.commands.sweep import sweep_cmd
from zerofilter.commands.verify import verify_cmd
from zerofilter.models import logger
from zerofilter.utils import EXIT_OK, EXIT_USAGE, error_response

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

# --- Environment Loading ---
# an absent .env is fine for a command-line tool
DOTENV_PATH = os.path.join(os.getcwd(), ".env")
load_dotenv(DOTENV_PATH)


class _StderrHandler(logging.StreamHandler):
    """Writes to whatever sys.stderr is when the record is emitted."""

    def __init__(self):
        super().__init__()
        self.setFormatter(logging.Formatter(LOG_FORMAT))

    @property
    def stream(self):
        return sys.stderr

    @stream.setter
    def stream(self, value):
        pass


def configure_logging(verbose=False):
    level_name = os.environ.get("ZEROFILTER_LOG_LEVEL", "WARNING").upper()
    level = logging.getLevelName(level_name)
    if not isinstance(level, int):
        warnings.warn(
            f"ZEROFILTER_LOG_LEVEL={level_name!r} is not a logging level; "
            "falling back to WARNING",
            RuntimeWarning,
        )
        level = logging.WARNING
    if verbose:
        level = min(level, logging.INFO)
    package = logging.getLogger("zerofilter")
    if not any(isinstance(h, _StderrHandler) for h in package.handlers):
        package.addHandler(_StderrHandler())
    package.setLevel(level)
    logger.setLevel(level)
    return level


@click.group()
@click.version_option(VERSION, prog_name="zerofilter")
@click.option("--verbose", "-v", is_flag=True, help="Log progress at INFO level.")
def cli(verbose):
    """Pseudospectral zero-filter-limit laboratory."""
    configure_logging(verbose)


# ==================
# Commands
# ==================

cli.add_command(solve_cmd)
cli.add_command(sweep_cmd)
cli.add_command(verify_cmd)
cli.add_command(norms_cmd)
cli.add_command(oracle_cmd)


def cli_main(argv=None):
    """Run the CLI and return its exit code instead of exiting."""
    try:
        result = cli.main(args=argv, prog_name="zerofilter", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except click.exceptions.Abort:
        return error_response("aborted", EXIT_USAGE)
    return result if isinstance(result, int) else EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(cli_main())
