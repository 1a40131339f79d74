"""Exception hierarchy shared by the numerical modules and the CLI."""


class Delaunay4Error(Exception):
    """Base class for every error raised by delaunay4."""


class DimensionError(Delaunay4Error, ValueError):
    """Raised when the dimension n is not admissible (n < 5)."""


class ValidationError(Delaunay4Error, ValueError):
    """Bad user input (grids, unit vectors, tolerances)."""


class NumericalFailure(Delaunay4Error):
    """A numerical procedure could not reach its target."""


class IntegrationEvent(NumericalFailure):
    """An integration stopped early; ``time`` is where it happened."""

    def __init__(self, message, time):
        super().__init__(message)
        self.time = time


class BlowUpDetected(IntegrationEvent):
    pass


class ZeroCrossingDetected(IntegrationEvent):
    pass


class BracketNotFound(NumericalFailure):
    pass


class ToleranceNotMet(NumericalFailure):
    pass


class NoReturnFound(NumericalFailure):
    pass


class OrbitNotPeriodic(NumericalFailure):
    pass


class DegenerateRegression(NumericalFailure):
    pass


class EnergyOutOfRange(NumericalFailure):
    pass


class InsufficientSpan(NumericalFailure):
    pass
