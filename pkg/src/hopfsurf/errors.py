"""Exception types raised by the geometry kernels."""


class GeometryError(ValueError):
    """Base class for every domain error in the package."""


class DimensionMismatch(GeometryError):
    pass


class TubeRadiusUndefined(GeometryError):
    """No real focal radius exists for the requested Hopf curvature."""


class WrongCausalType(GeometryError):
    pass


class NearNullInput(GeometryError):
    pass


class NullVector(GeometryError):
    pass


class NotApplicable(GeometryError):
    pass


class DegenerateMetric(GeometryError):
    pass


class NormalNotSpacelike(GeometryError):
    def __init__(self, message, suggested_spec=None):
        super().__init__(message)
        self.suggested_spec = suggested_spec


class GaugeDiscontinuity(GeometryError):
    pass


class StencilTooCoarse(GeometryError):
    pass


class NullProbe(GeometryError):
    pass


class NotHopf(GeometryError):
    pass


class CompanionUndefined(GeometryError):
    pass


class InKernel(GeometryError):
    pass


class InvalidRadius(GeometryError):
    pass


class DegenerateChart(GeometryError):
    pass


class CoreNotInvariant(GeometryError):
    pass


class ConfigError(GeometryError):
    pass
