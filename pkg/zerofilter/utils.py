import os

import click

from zerofilter.models import logger

EXIT_OK = 0
EXIT_ASSERTION = 1
EXIT_USAGE = 2


class ZeroFilterError(Exception):
    """Base class for every error raised by the laboratory."""


class InvalidFieldError(ZeroFilterError):
    pass


class NonRealSpectrumError(ZeroFilterError):
    pass


class OutOfRangeError(ZeroFilterError):
    pass


class UndefinedRatioError(ZeroFilterError):
    pass


class InstabilityError(ZeroFilterError):
    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class CharacteristicRangeError(ZeroFilterError):
    pass


class RootFindError(ZeroFilterError):
    pass


class FitError(ZeroFilterError):
    pass


class ProbeError(ZeroFilterError):
    def __init__(self, message, label=None):
        super().__init__(message)
        self.label = label


class ConfigError(ZeroFilterError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SnapshotFormatError(ZeroFilterError):
    pass


def error_response(message, code):
    logger.error(message)
    click.echo(f"error: {message}", err=True)
    return code


def exit_code_for(exc):
    """Usage/config problems exit 2; a failed run or check exits 1."""
    if isinstance(
        exc, (ConfigError, SnapshotFormatError, CharacteristicRangeError, OSError)
    ):
        return EXIT_USAGE
    return EXIT_ASSERTION


def resolve_output_dir(option, configured=None, fallback="zerofilter-out"):
    """--out, then [output] dir, then ZEROFILTER_OUTPUT_DIR, then `fallback`."""
    return (
        option or configured or os.environ.get("ZEROFILTER_OUTPUT_DIR") or fallback
    )
