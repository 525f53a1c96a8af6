"""Exception types raised across the package."""


class SMPRError(Exception):
    """Base class for all package errors."""


class NonPositiveDefiniteMoments(SMPRError, ValueError):
    """A moment sequence whose Hankel matrix is singular or indefinite."""


class RecurrenceLengthError(SMPRError, ValueError):
    """Requested degree exceeds the stored recurrence."""


class NonDiagonalizableOrDegenerate(SMPRError, ValueError):
    """Triangular matrix with repeated diagonal entries."""


class InvalidSpec(SMPRError, ValueError):
    """A process specification violating one or more invariants.

    ``violations`` lists every failed check, not just the first.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class UnboundedSupportError(SMPRError, ValueError):
    """Operation requires a bounded stationary support."""


class InsufficientPaths(SMPRError, ValueError):
    """Too few Monte Carlo paths for a meaningful test."""
