"""Exception types shared across the package."""


class SupolyError(Exception):
    """Base class for numeric failures raised by this package.

    Argument validation uses plain ValueError; subclasses of this error
    signal conditions discovered mid-computation (degenerate input data,
    ambiguous boundary configurations, exact zeros on a sample sphere).
    """


class DegeneratePolynomialError(SupolyError):
    """All weighted coefficients are numerically zero; roots are undefined."""


class BoundaryAmbiguityError(SupolyError):
    """A root lies too close to the counting circle to classify reliably."""


class ExactZeroError(SupolyError):
    """A sphere sample hit an exact zero and resampling did not recover."""
