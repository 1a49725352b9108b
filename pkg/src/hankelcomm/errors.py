"""Exception types shared across the package."""


class HankelCommError(Exception):
    """Base class for all package-specific errors."""


class ConstraintViolation(HankelCommError):
    """A family parameter lies outside its admissible domain."""


class DegenerateDenominator(HankelCommError):
    """A recurrence-coefficient denominator vanishes at some index."""


class DomainError(HankelCommError):
    """An evaluation was requested outside the analyticity domain."""


class PivotError(HankelCommError):
    """The descend recurrence hit a near-zero pivot alpha_n - alpha_0.

    Carries the offending index in ``args[1]`` when raised by
    :func:`hankelcomm.commutation.descend_extend`.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class DegenerateFitError(HankelCommError):
    """The least-squares system of an asymptotic fit is singular."""


class PrecisionError(HankelCommError):
    """A precision context was misconfigured or used where unsupported."""
