"""Exception types shared across the package."""


class AnminError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(AnminError):
    """Operands have incompatible shapes."""


class SingularMatrix(AnminError):
    """A direct factorization failed; caller may fall back to a pseudo-solve."""


class NoConvergence(AnminError):
    """An iterative factorization (SVD) hit its iteration limit."""


class SingularSystem(AnminError):
    """The output-layer normal equations are singular (only possible at lambda=0)."""


class DegenerateTargets(AnminError):
    """An output column is constant, so R^2 is undefined for it."""


class DataError(AnminError):
    """Malformed dataset or dataset file."""


class ParseError(DataError):
    """CSV value could not be parsed; carries row/column location in the message."""


class MissingColumn(DataError):
    """A named CSV column is absent."""


class NotBinary(DataError):
    """Mask image has values other than 0/255."""


class EmptyShape(DataError):
    """Mask image has no boundary (all background or all foreground)."""


class ImageTooSmall(DataError):
    """Image cannot fit a single patch."""


class NumericalFailure(AnminError):
    """Every solver fallback failed during training."""


class DivergenceDetected(AnminError):
    """Gradient-descent loss exceeded the blow-up threshold."""


class UnpairedRuns(AnminError):
    """Two methods were not run on identical split indices."""
