"""Exception hierarchy.

Errors split into two families so the CLI can map them onto exit codes:
``DomainError`` (inputs outside the physical model, exit 2) and
``NumericalError`` (the numerics broke down, exit 3).
"""


class HeraldkitError(Exception):
    """Base class for every error raised by this package."""


class DomainError(HeraldkitError):
    pass


class NumericalError(HeraldkitError):
    pass


class OutOfDispersionWindow(DomainError):
    pass


class NoSolution(DomainError):
    pass


class InconsistentTriple(DomainError):
    pass


class NonPositiveBirefringence(DomainError):
    pass


class FilterOutsideGrid(DomainError):
    pass


class GridMismatch(DomainError):
    pass


class PlateauNotReached(DomainError):
    pass


class ZeroDenominator(DomainError):
    pass


class UnphysicalEfficiency(DomainError):
    pass


class EmptyCurve(DomainError):
    pass


class BoundaryMaximum(DomainError):
    pass


class GridTooCoarse(NumericalError):
    pass


class SvdFailure(NumericalError):
    pass
