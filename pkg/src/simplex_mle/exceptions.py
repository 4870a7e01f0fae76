"""Exception hierarchy for simplex_mle."""


class SimplexMLEError(Exception):
    """Base class for all package errors."""


class ValidationError(SimplexMLEError, ValueError):
    """Malformed input: bad type vector, mismatched dimensions, bad model file."""


class InfeasibleError(SimplexMLEError):
    """A linear program (or the feasible set itself) has no feasible point."""


class UnboundedError(SimplexMLEError):
    """A linear program is unbounded in the direction of optimization."""


class StructuralZeroError(ValidationError):
    """The feasible set does not have full support on the alphabet."""


class EmptySliceError(SimplexMLEError):
    """No passive completion exists for the given active coordinates."""


class DimensionTooLargeError(SimplexMLEError):
    """The passive projection has more free dimensions than the outer optimizer allows."""


class ConvergenceError(SimplexMLEError):
    """An iterative solver stopped without meeting its convergence criterion."""


class InvariantViolation(SimplexMLEError):
    """A solver returned a result that fails a post-condition (indicates a bug)."""
