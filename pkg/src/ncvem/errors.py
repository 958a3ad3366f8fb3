"""Exception types shared across the package."""


class NcvemError(Exception):
    """Base class for all package-specific errors."""


class MeshError(NcvemError):
    """Inconsistent mesh topology or geometry."""


class MeshFormatError(MeshError):
    """Malformed mesh file.  Carries a human-readable location hint."""

    def __init__(self, message, where=None):
        self.where = where
        if where is not None:
            message = f"{message} (at {where})"
        super().__init__(message)


class GenerationError(NcvemError):
    """Mesh generation failed (degenerate seeds, folded cells, ...)."""


class QuadratureError(NcvemError):
    """Quadrature rule could not be certified or hit a star-shape violation."""


class NumericError(NcvemError):
    """A local linear system (Gram, stiffness, mass) was singular."""


class CoefficientError(NcvemError):
    """Coefficient field violates its assumptions (e.g. lost ellipticity)."""


class SolverError(NcvemError):
    """Global sparse solve failed; carries diagnostics in ``details``."""

    def __init__(self, message, details=None):
        self.details = details or {}
        super().__init__(message)
