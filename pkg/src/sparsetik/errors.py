"""Exception hierarchy. Every class also derives from a builtin so callers
can catch ``ValueError``/``RuntimeError`` without importing this module."""


class SparsetikError(Exception):
    pass


class DimensionError(SparsetikError, ValueError):
    pass


class PreconditionError(SparsetikError, ValueError):
    pass


class MultivaluedPointError(SparsetikError, ValueError):
    pass


class FBIViolationError(SparsetikError, ValueError):
    pass


class UnsupportedCaseError(SparsetikError, ValueError):
    pass


class DivergenceError(SparsetikError, RuntimeError):
    pass


class NetTooCoarseError(SparsetikError, RuntimeError):
    pass


class BoundViolationError(SparsetikError, AssertionError):
    """A certified inequality failed on a computed instance.

    ``row`` carries the offending record, if any.
    """

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row
