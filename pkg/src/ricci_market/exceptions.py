"""Exception hierarchy shared by the library and the command line.

Every error carries a short machine-readable ``error_class`` and the process
exit code the CLI maps it to (0 success, 2 I/O, 3 validation, 4 numeric).
"""


class RicciMarketError(Exception):
    error_class = "error"
    exit_code = 1


class InputIOError(RicciMarketError, OSError):
    error_class = "io"
    exit_code = 2


class MissingArtifactError(RicciMarketError, FileNotFoundError):
    error_class = "missing-artifact"
    exit_code = 2


class ValidationError(RicciMarketError, ValueError):
    error_class = "validation"
    exit_code = 3


class TooShortError(ValidationError):
    error_class = "too-short"


class NumericError(RicciMarketError, ArithmeticError):
    error_class = "numeric"
    exit_code = 4
