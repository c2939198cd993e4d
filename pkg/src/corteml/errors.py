"""Exception taxonomy shared by the library and the CLI.

Exit-code mapping used by the CLI: DataError -> 2 (I/O and schema
problems), ComputeError -> 1 (degenerate data, numerical failures).
"""


class CortemlError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class DataError(CortemlError):
    """Malformed input files, schema violations, I/O failures."""

    exit_code = 2


class ComputeError(CortemlError):
    """Degenerate data or a computation that cannot proceed."""

    exit_code = 1
