"""Exception hierarchy shared by all modules."""


class ConicStabError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(ConicStabError, ValueError):
    pass


class NoConvergence(ConicStabError, RuntimeError):
    pass


class SignatureError(ConicStabError, ValueError):
    """A symmetric matrix does not have the required inertia."""


class DegreeDropError(ConicStabError, ValueError):
    """The leading coefficient of a univariate polynomial is numerically zero."""


class PrecisionError(ConicStabError, ValueError):
    pass


class SingularMatrixError(ConicStabError, ValueError):
    pass


class ZeroPolynomialError(ConicStabError, ValueError):
    pass


class UnsupportedQuadricError(ConicStabError, ValueError):
    pass


class NormalizationError(ConicStabError, ValueError):
    pass


class ScalingPreconditionError(ConicStabError, ValueError):
    pass


class UnboundedSliceError(ConicStabError, ValueError):
    pass


class IdentityCheckError(ConicStabError, ArithmeticError):
    pass


class SchemaError(ConicStabError, ValueError):
    """Malformed input document; the message names the offending field."""
