"""Exception hierarchy.

Everything raised on purpose by this package derives from DelayRCError so
callers can catch one type. Configuration problems (bad parameters, bad
config files) are kept separate from numerical failures because the CLI
maps them to different exit codes.
"""


class DelayRCError(Exception):
    pass


class ConfigurationError(DelayRCError, ValueError):
    """Invalid parameter value, config key, or argument combination."""


class DataFormatError(DelayRCError, ValueError):
    """Malformed input data file.

    Carries the offending 1-based line number when known.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NumericsError(DelayRCError, ArithmeticError):
    """Numerical failure at runtime (divergence, non-finite results)."""


class SingularMatrixError(NumericsError):
    """Normal-equation matrix is numerically singular."""
