"""Exception types shared across the package."""


class VqlsGpError(Exception):
    """Base class for all package-specific failures."""


class DimensionMismatch(VqlsGpError):
    """Operands have incompatible shapes."""


class NotPositiveDefinite(VqlsGpError):
    """A Cholesky pivot was non-positive; the matrix is not (numerically) SPD."""


class NonFiniteGradient(VqlsGpError):
    """An optimizer received a gradient containing NaN or infinity."""


class NonFiniteObjective(VqlsGpError):
    """An objective function evaluated to NaN or infinity."""


class QubitCountOutOfRange(VqlsGpError):
    """Requested register size is outside the supported range."""


class InvalidTarget(VqlsGpError):
    """A gate or measurement targets a qubit outside the register."""


class ControlTargetOverlap(VqlsGpError):
    """A control qubit coincides with one of the controlled gates' targets."""


class NotPowerOfTwo(VqlsGpError):
    """Matrix dimension is not a power of two."""


class NonRealInput(VqlsGpError):
    """Input expected to be real carries a non-negligible imaginary part."""


class IndexOutOfRange(VqlsGpError):
    """Basis-state index does not fit in the register."""


class ZeroVector(VqlsGpError):
    """A vector that must be nonzero is identically zero."""


class ParamCountMismatch(VqlsGpError):
    """Parameter vector length does not match the ansatz layout."""


class MissingReuploadVector(VqlsGpError):
    """A data-reuploading ansatz was requested without a vector to embed."""


class NonPositiveNorm(VqlsGpError):
    """The transformed-state norm evaluated to a non-positive value."""


class SingularMatrix(VqlsGpError):
    """The system matrix is singular (zero determinant)."""


class ConfigError(VqlsGpError):
    """Invalid experiment or solver configuration."""
