"""Exception types raised by the solver library."""


class DscError(Exception):
    """Base class for all dscflow errors."""


class DegenerateCell(DscError):
    """Cell has non-positive volume or a collapsed node-vector basis."""


class SingularBasis(DscError):
    """Node vectors are (numerically) linearly dependent."""


class InvalidDimensions(DscError):
    """Mesh generator called with unusable counts or lengths."""


class MeshFormatError(DscError):
    """Mesh file does not conform to the text format."""


class UnknownTag(DscError):
    """Boundary tag name not recognised."""


class NearSingularDenominator(DscError):
    """Interface update denominator is numerically zero (mesh quality failure)."""


class NonFiniteUpdate(DscError):
    """A nodal update produced NaN or Inf."""


class SorDiverged(DscError):
    """Pressure relaxation residual grew over consecutive sweeps."""


class NotConverged(DscError):
    """Projection loop hit its iteration cap above tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class ReconstructionMismatch(DscError):
    """Scattering-channel reconstruction identity violated (scheduler bug)."""


class SchemaError(DscError):
    """Configuration file violates the schema; carries all violations."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("\n".join(self.violations))


class IoError(DscError):
    """Output file could not be written."""


class InvalidProbe(DscError):
    """Probe refers to a cell id outside the mesh."""
