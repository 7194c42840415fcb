"""Exception types shared across the package.

Each class corresponds to one failure mode of the public operations; callers
that want a single catch-all can use ConeflowError.
"""


class ConeflowError(Exception):
    """Base class for all package errors."""


class ConfigError(ConeflowError):
    """Invalid scenario configuration (bad key, value out of range, ...)."""


class ParameterError(ConeflowError):
    """A numeric parameter is outside its admissible range."""


class SingularEvaluationError(ConeflowError):
    """Evaluation requested at (or too close to) a singular point."""


class KTooLargeError(ConeflowError):
    """Reference-metric coefficient k violates positivity on the grid."""


class ShapeError(ConeflowError):
    """Field does not match the grid it is used with."""


class MetricDegenerateError(ConeflowError):
    """A metric density is nonpositive somewhere it must be positive."""


class InadmissibleInitialProfileError(ConeflowError):
    """Initial potential fails the positivity condition 1 + lap(phi) > 0."""


class StepFailureError(ConeflowError):
    """Time step could not preserve metric positivity after all retries."""


class NewtonError(ConeflowError):
    """Damped Newton iteration stagnated before reaching tolerance."""


class SmoothingError(ConeflowError):
    """Mollified potential could not be made admissible."""


class UndefinedConstantError(ConeflowError):
    """Requested constant is undefined for these parameters (e.g. mu <= 0)."""


class MissingShiftError(ConeflowError):
    """Shifted quantity requested but no shift constant is available."""


class ResolutionError(ConeflowError):
    """Quadrature of a singular weight did not converge on this grid."""


class ComparisonError(ConeflowError):
    """Pairwise check called with mismatched discretizations."""


class NumericError(ConeflowError):
    """Unrecoverable floating-point failure (overflow, NaN, ...)."""
