"""Exception types raised on invalid operators, specs, and failed solves."""


class NotHermitian(ValueError):
    """Input operator is not Hermitian within tolerance."""


class Singular(ValueError):
    """Linear solve hit a pivot below the singularity cutoff."""


class CutoffTooSmall(ValueError):
    """Fock-space truncation must keep at least two levels."""


class DimensionMismatch(ValueError):
    """Operand dimensions are inconsistent."""


class DimensionUnsupported(ValueError):
    """Operation is only defined for a specific Hilbert dimension."""


class InvalidSpec(ValueError):
    """Model specification violates its invariants."""


class InvalidModel(ValueError):
    """Model kind not supported by the requested operation."""


class NotDensityMatrix(ValueError):
    """Input is not a valid density matrix within tolerance."""


class NonPureInitial(ValueError):
    """Trajectory simulation needs a pure initial state."""


class DegenerateSteadyState(RuntimeError):
    """Generator kernel is not one-dimensional."""


class NoConvergence(RuntimeError):
    """Long-time propagation did not reach stationarity in time."""


class CutoffSaturated(RuntimeError):
    """Population reached the top truncated Fock level."""


class StepTooLarge(RuntimeError):
    """Fixed-step integration lost trace beyond the hard limit."""
