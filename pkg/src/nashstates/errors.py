"""Exception types shared across the package."""


class NashStatesError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatchError(NashStatesError, ValueError):
    """Operands live on Hilbert spaces of different dimension."""


class NotHermitianError(NashStatesError, ValueError):
    """An operator violated its declared Hermiticity tag."""


class InvariantViolationError(NashStatesError, ValueError):
    """A declared data invariant failed at construction or audit time."""


class NotNashStateError(NashStatesError, ValueError):
    """Operation requires an (approximate) Nash state and got something else."""


class SolverError(NashStatesError, RuntimeError):
    """Base class for numerical-solver failures."""


class NewtonConvergenceError(SolverError):
    """Gauss-Newton did not reach the requested residual tolerance."""

    def __init__(self, message, *, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class JacobianRankError(SolverError):
    """The least-squares step was singular (effective rank zero)."""


class TangentDimensionError(SolverError):
    """Curve tracing requires a one-dimensional tangent space."""


class ProjectionPoleError(NashStatesError, ValueError):
    """Stereographic projection evaluated at (or too near) its pole."""
