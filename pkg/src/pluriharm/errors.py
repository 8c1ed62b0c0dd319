"""Exception hierarchy shared by every module."""


class PluriharmError(Exception):
    """Base class for all errors raised by the package."""


class DomainViolationError(PluriharmError):
    """A point (or a stencil point around it) lies outside a chart domain."""


class NumericalError(PluriharmError):
    """A non-finite value was produced by a callback or a computation."""


class IllConditionedMetricError(PluriharmError):
    """The metric matrix is singular or too badly conditioned to invert."""


class ClassificationInconsistencyError(PluriharmError):
    """Computed class flags violate the inclusion chain between classes."""

    def __init__(self, message, flags=None):
        super().__init__(message)
        self.flags = flags


class PreconditionError(PluriharmError):
    """An operation was called on inputs that fail its stated hypothesis."""

    def __init__(self, message, measured=None):
        super().__init__(message)
        self.measured = measured


class ModelConstructionError(PluriharmError):
    """A zoo model or map failed its construction-time invariants."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals or {}


class ConfigError(PluriharmError):
    """Invalid configuration (parameters out of range, bad selectors, ...)."""


class ResolutionError(PluriharmError):
    """Quadrature error estimate exceeded the requested budget."""

    def __init__(self, message, suggested_nodes=None):
        super().__init__(message)
        self.suggested_nodes = suggested_nodes
