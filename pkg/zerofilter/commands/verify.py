import click

from zerofilter.helpers.verify_helpers import run_suite
from zerofilter.models.check import SUITES
from zerofilter.utils import (
    EXIT_ASSERTION,
    EXIT_OK,
    ZeroFilterError,
    error_response,
)


@click.command("verify")
@click.option(
    "--suite",
    "suites",
    type=click.Choice(SUITES),
    multiple=True,
    required=True,
    help="May be given more than once.",
)
@click.pass_context
def verify_cmd(ctx, suites):
    """Run invariant suites; exit 1 if any check fails."""
    failed = []
    for name in suites:
        try:
            result = run_suite(name)
        except ZeroFilterError as exc:
            failed.append(f"{name}: {exc}")
            continue
        for check in result.checks:
            click.echo(f"{name} {check}")
        failed += [f"{name}: {check.name}" for check in result.failures]
    if failed:
        ctx.exit(error_response(f"failed checks: {'; '.join(failed)}", EXIT_ASSERTION))
    ctx.exit(EXIT_OK)
