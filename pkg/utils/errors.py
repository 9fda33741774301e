"""Exception hierarchy shared by the algebra, bases and estimation packages."""
from typing import Optional


class QuquartError(ValueError):
    """Base class for every domain error raised by the library."""


class RingSpecError(QuquartError):
    """Invalid ring parameters or defining polynomial."""


class RingMismatchError(QuquartError):
    """Operands belong to different ring contexts."""


class DualBasisError(QuquartError):
    """Basis is dependent or its Gram determinant is a zero divisor."""


class DimensionError(QuquartError):
    """Matrix or table shape does not match the basis family."""


class NormalizationError(QuquartError):
    """Probabilities fail per-setup normalization."""


class ConfigError(QuquartError):
    """Run configuration rejected before any computation starts."""


class SingularBlockError(QuquartError):
    """A Fisher block could not be solved after probability clamping."""

    def __init__(self, label: str, detail: Optional[str] = None):
        self.label = label
        message = f"singular Fisher block {label}"
        if detail:
            message += f": {detail}"
        super().__init__(message)


class UnitarityError(QuquartError):
    """A constructed basis matrix is not unitary within tolerance."""


class StateError(QuquartError):
    """Density matrix fails the Hermiticity, trace or positivity checks."""
