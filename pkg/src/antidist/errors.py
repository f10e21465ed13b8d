"""Exception types shared across the package."""


class AntidistError(Exception):
    """Base class for all library errors."""


class ValidationError(AntidistError):
    """Input fails a structural or numerical precondition."""


class DomainError(ValidationError):
    """Input is structurally fine but outside the mathematical domain
    of the operation (e.g. log of a singular matrix)."""


class ResourceLimitError(AntidistError):
    """A size cap would be exceeded (tensor-power dimension, exact
    enumeration count)."""

    def __init__(self, message, limit=None, requested=None):
        super().__init__(message)
        self.limit = limit
        self.requested = requested


class ConvergenceError(AntidistError):
    """An iterative solver failed to reach its tolerance.  Carries the
    best iterate found so far when available."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
