"""Exception types raised across the package."""


class InfWebError(Exception):
    """Base class for all package errors."""


class DegenerateBoundary(InfWebError):
    """Domain data does not describe a valid open planar set."""


class OutsideDomain(InfWebError):
    """A query point lies outside the closed domain."""


class NotSingular(InfWebError):
    pass


class NotInSuperdifferential(InfWebError):
    pass


class InvalidReach(InfWebError):
    pass


class OutOfRange(InfWebError):
    pass


class SingularDerivative(InfWebError):
    """Second derivative of a profile requested where it is unbounded."""


class EmptyBin(InfWebError):
    pass


class NoInteriorNodes(InfWebError):
    pass


class ParseError(InfWebError):
    pass


class NotConvergedWarning(UserWarning):
    """Emitted when a solve stops at ``max_iter`` above tolerance."""
