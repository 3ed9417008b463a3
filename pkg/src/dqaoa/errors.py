"""Exception types shared across the package.

Argument errors (bad dimensions, out-of-range indices) raise plain
``ValueError``; the classes below cover the remaining failure modes that
callers may want to handle separately. The CLI maps them to exit codes.
"""


class CapacityError(Exception):
    """A resource cap would be exceeded (e.g. too many qubits to simulate)."""


class DataError(Exception):
    """Malformed or inconsistent input data (files, tables, spectra)."""


class SolverError(Exception):
    """A solver failed to produce a result."""


class UndefinedRatioError(ValueError):
    """Approximation ratio is undefined because the reference energy is zero."""
