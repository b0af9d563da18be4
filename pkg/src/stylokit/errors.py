"""Exception types shared across the toolkit.

Convention: precondition violations on in-memory values raise ValueError,
malformed external data raises DataError, and operations that need more data
than the input provides raise InsufficientDataError.
"""


class StylokitError(Exception):
    """Base class for all toolkit errors."""


class DataError(StylokitError):
    """An input file, record, or response is malformed or missing."""


class InsufficientDataError(StylokitError):
    """The input is well formed but too small for the requested operation."""
