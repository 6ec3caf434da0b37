"""Exception hierarchy.

Every error raised deliberately by the package derives from :class:`DTQCError`.
The ``exit_code`` attribute is what the command-line frontend returns when the
error escapes a subcommand.
"""


class DTQCError(Exception):
    exit_code = 1


class ValidationError(DTQCError, ValueError):
    """Bad user input: parameters, config values, grid definitions."""

    exit_code = 2


class SizeError(ValidationError):
    pass


class PartitionError(ValidationError):
    pass


class NamingError(ValidationError, KeyError):
    def __str__(self):
        # KeyError quotes its message; keep it readable.
        return str(self.args[0]) if self.args else ""


class ConsistencyError(ValidationError):
    """Objects that must agree (basis, dimension, table length) do not."""


class SamplingError(ValidationError):
    """Time series is too short or not on a uniform grid."""


class WindowingError(SamplingError):
    pass


class DataIOError(DTQCError, OSError):
    exit_code = 3


class NumericalError(DTQCError, ArithmeticError):
    exit_code = 4
