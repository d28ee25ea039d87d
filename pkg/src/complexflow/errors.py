"""Exception hierarchy shared by every module."""


class ComplexFlowError(Exception):
    """Base class for all library errors."""


class PoleError(ComplexFlowError):
    """Möbius denominator is singular for the given width."""

    def __init__(self, alpha, message="pole"):
        super().__init__(f"{message}: alpha={alpha!r}")
        self.alpha = alpha


class DegenerateWidthError(ComplexFlowError):
    """Imaginary part of a width is not invertible."""


class AdmissibilityError(ComplexFlowError):
    """A width parameter leaves the upper half-space."""


class GridMismatchError(ComplexFlowError):
    """Objects live on different grids."""


class UnderresolvedError(ComplexFlowError):
    """The grid cannot resolve an oscillatory kernel or state."""


class ChartError(ComplexFlowError):
    """No usable chart for the metaplectic kernel."""


class FitError(ComplexFlowError):
    """Gaussian fit failed; ``diagnostics`` holds the details."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class OverlapError(ComplexFlowError):
    """A normalising overlap vanished."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class RepresentationMismatch(ComplexFlowError):
    """No off-diagonal representation variant reproduced the conjugation oracle."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals or {}


class SchemaError(ComplexFlowError):
    """A file did not match its declared schema."""
