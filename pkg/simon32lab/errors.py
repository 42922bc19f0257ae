# -*- coding: utf-8 -*-
"""Exception hierarchy and process exit codes."""

# Exit codes returned by main.py.
EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_FORMAT = 4
EXIT_EMPTY = 5


class ContractError(ValueError):
    """A precondition of an operation was violated."""


class ConfigError(ValueError):
    """The run configuration is invalid."""


class PddtFormatError(ValueError):
    """A pDDT binary file could not be decoded."""


class BadMagicError(PddtFormatError):
    """The file does not start with the pDDT magic bytes."""


class VersionMismatchError(PddtFormatError):
    """The file is a pDDT file written by an unsupported format version."""


class TruncatedFileError(PddtFormatError):
    """The header or payload is shorter than announced."""


class UnsortedPayloadError(PddtFormatError):
    """Entries are not in strictly increasing canonical (a, b, c) order."""


class EmptyResultError(RuntimeError):
    """A stage produced no rows where at least one was required."""


def exit_code_for(exc: BaseException) -> int:
    """Map an exception raised by a pipeline stage to a process exit code."""
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, PddtFormatError):
        return EXIT_FORMAT
    if isinstance(exc, EmptyResultError):
        return EXIT_EMPTY
    if isinstance(exc, OSError):
        return EXIT_IO
    # Contract violations reaching the CLI come from user-supplied values.
    if isinstance(exc, ContractError):
        return EXIT_CONFIG
    return 1
