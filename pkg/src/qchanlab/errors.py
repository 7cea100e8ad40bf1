"""Exception types shared across the package."""


class QChanLabError(Exception):
    """Base class for all package errors."""


class ValidationError(QChanLabError, ValueError):
    """A value violates one of its structural invariants.

    The message names the violated invariant and carries the offending
    residual so failures are diagnosable from logs alone.
    """

    def __init__(self, invariant: str, residual: float | None = None):
        self.invariant = invariant
        self.residual = residual
        if residual is None:
            super().__init__(invariant)
        else:
            super().__init__(f"{invariant} (residual {residual:.3e})")


class DomainError(QChanLabError, ValueError):
    """An argument lies outside the operation's admissible domain."""


class ScaleCapError(DomainError):
    """A requested problem exceeds the desk-scale dimension cap."""
