"""Exception types shared across the package."""


class DbmEdgeError(Exception):
    """Base class for all package-specific errors."""


class PoleProximity(DbmEdgeError):
    """Evaluation point is too close to the spectrum of the initial data."""


class InvalidDensity(DbmEdgeError):
    """Density specification has wrong mass or unbounded support."""


class NoConvergence(DbmEdgeError):
    """Fixed-point solver exhausted its iteration budget."""

    def __init__(self, message, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class StepCollapse(DbmEdgeError):
    """Continuation step size underflowed before reaching the target."""


class NoBracket(DbmEdgeError):
    """No sign change found when bracketing the edge critical point."""


class NegativeCube(DbmEdgeError):
    """Third stability coefficient is non-positive; edge scaling undefined."""


class QuadratureFailure(DbmEdgeError):
    """Numerical integration failed or the target mass is unreachable."""


class NonMonotoneCDF(DbmEdgeError):
    """A density table's counting function is not strictly increasing."""


class EigenFailure(DbmEdgeError):
    """Dense symmetric eigensolver did not converge."""


class StepUnderflow(DbmEdgeError):
    """SDE integrator step fell below resolution (near-collision)."""


class IndexOverflow(DbmEdgeError):
    """Requested index lies outside the valid window."""


class BadHierarchy(DbmEdgeError):
    """Scale exponents violate the required strict ordering."""


class LinearSolveFailure(DbmEdgeError):
    """Implicit propagation step could not be solved."""


class ShapeMismatch(DbmEdgeError):
    """Sample sets have incompatible shapes."""


class ConfigError(DbmEdgeError):
    """Run configuration is invalid."""


class IOFailure(DbmEdgeError):
    """Artifact persistence failed."""


class SchemaMismatch(DbmEdgeError):
    """Serialized artifact has an unexpected schema or version."""
