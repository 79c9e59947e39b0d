"""Exception hierarchy shared by every module of the package."""


class InexactKrylovError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(InexactKrylovError, ValueError):
    pass


class NotPositiveDefinite(InexactKrylovError, ArithmeticError):
    """A non-positive pivot was met while factorizing a matrix assumed SPD."""


class NegativeQuadraticForm(InexactKrylovError, ArithmeticError):
    pass


class SingularMatrix(InexactKrylovError, ArithmeticError):
    """Zero pivot in a Hessenberg solve; for FOM this is a breakdown of H_k."""


class InvalidSpec(InexactKrylovError, ValueError):
    pass


class UnsupportedFormat(InexactKrylovError, ValueError):
    pass


class MalformedFile(InexactKrylovError, ValueError):
    pass


class NotSymmetric(InexactKrylovError, ValueError):
    pass


class ZeroDirection(InexactKrylovError, ValueError):
    pass


class OutOfRange(InexactKrylovError, ValueError):
    pass


class InvalidAccuracy(InexactKrylovError, ValueError):
    pass


class DegenerateResidual(InexactKrylovError, ZeroDivisionError):
    """The residual norm vanished, so the accuracy formula is undefined."""


class IndefiniteCurvature(InexactKrylovError, ArithmeticError):
    """p^T (A+E) p <= 0: the injected error destroyed positive curvature."""


class ConfigError(InexactKrylovError, ValueError):
    pass
