"""Exception types raised by the solver layers."""


class GeometryError(ValueError):
    """Scatterer components overlap or touch."""


class DegenerateCurveError(GeometryError):
    """A star-like curve has a nonpositive radius somewhere on the grid."""


class ConditioningError(RuntimeError):
    """A boundary-integral system is numerically singular.

    For the single-layer field equations this is the symptom of an interior
    Dirichlet resonance of one of the components.
    """

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class SynthesisError(ConditioningError):
    """The combined-potential forward system could not be solved reliably."""
