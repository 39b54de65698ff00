"""Exception hierarchy.  The CLI maps these onto its exit codes."""


class HdustatError(Exception):
    """Base class for all errors raised by this package."""


class InputError(HdustatError, ValueError):
    """Malformed or out-of-range input to a statistical routine."""


class ConfigError(HdustatError, ValueError):
    """Invalid run configuration (CLI exit code 2)."""


class DataError(HdustatError, ValueError):
    """Unreadable or invalid data file (CLI exit code 3)."""


class DegeneracyError(HdustatError, ArithmeticError):
    """A statistic is undefined for the given data (CLI exit code 4)."""


class DegeneratePairError(DegeneracyError):
    """A kernel was evaluated on a tied pair where it is undefined.

    ``index`` is a row position inside the batch that failed, ``pair`` the
    (i, j) observation indices once the aggregation layer has located it.
    """

    def __init__(self, message, index=None, pair=None):
        super().__init__(message)
        self.index = index
        self.pair = pair


class UnsupportedPairError(HdustatError, ValueError):
    """No closed form exists for the requested (kernel, marginal) combination."""
