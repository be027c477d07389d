"""Exception types shared across the toolkit."""
from __future__ import annotations


class CorrcapError(Exception):
    """Base class for all toolkit errors."""


class NonHermitianError(CorrcapError, ValueError):
    """A matrix that must be Hermitian is not, beyond tolerance."""


class DimMismatchError(CorrcapError, ValueError):
    """Operands have incompatible shapes."""


class UnknownGateError(CorrcapError, ValueError):
    """Requested gate name is not in the gate table."""


class InvalidTimeError(CorrcapError, ValueError):
    """A duration or decay constant is negative or otherwise unusable."""


class InvalidProbabilityError(CorrcapError, ValueError):
    """A probability lies outside [0, 1]."""


class TriadError(CorrcapError, ValueError):
    """Measurement triad fails its orthonormality or involution checks."""


class IncompleteGridError(CorrcapError, ValueError):
    """A tomography dataset does not cover the full input x setting grid."""


class MissingInputError(CorrcapError, ValueError):
    """A required reconstruction input is absent."""


class ZeroTraceError(CorrcapError, ValueError):
    """Projection produced a matrix with (near) zero trace; cannot renormalize."""


class NonPhysicalInputError(CorrcapError, ValueError):
    """A process matrix violates positivity or trace conventions."""


class SchemaError(CorrcapError, ValueError):
    """A serialized payload does not match the expected schema."""


class ShotMismatchError(CorrcapError, ValueError):
    """Recorded counts do not sum to the declared shot number."""


class SolverFailure(CorrcapError, RuntimeError):
    """The conic solver crashed or returned an unusable solution."""
