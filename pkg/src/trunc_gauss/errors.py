"""Exception types raised by the samplers and their supporting numerics."""

from __future__ import annotations


class DimensionMismatch(ValueError):
    """Array shapes disagree with the problem dimension."""


class InfeasibleStart(ValueError):
    """Initial point violates (or sits on) a constraint.

    ``index`` is the first violated constraint: a coordinate index for box
    constraints, a row index for general linear constraints.
    """

    def __init__(self, index: int, message: str | None = None):
        self.index = index
        super().__init__(message or f"initial point violates constraint {index}")


class NotPositiveDefinite(ValueError):
    """Matrix failed a positive-definiteness check.

    ``pivot`` is the index of the offending Cholesky pivot when known.
    """

    def __init__(self, message: str = "matrix is not positive definite", pivot: int | None = None):
        self.pivot = pivot
        super().__init__(message)


class SingularDiagonal(ValueError):
    """Triangular solve encountered a zero diagonal entry."""


class NoConvergence(RuntimeError):
    """Iterative eigenvalue solve exhausted its iteration budget.

    ``iterations`` records how many iterations ran.
    """

    def __init__(self, iterations: int, message: str | None = None):
        self.iterations = iterations
        super().__init__(message or f"no convergence after {iterations} iterations")


class MissingCholesky(RuntimeError):
    """Operation needs a cached Cholesky factor that was never prepared."""


class InfeasibleState(RuntimeError):
    """Sampler state drifted outside the feasible region beyond tolerance."""


class ZeroNormal(ValueError):
    """Reflection requested against a zero constraint normal."""


class TooManyBounces(RuntimeError):
    """A single trajectory exceeded the wall-bounce budget."""


class TooManyEvents(RuntimeError):
    """A single trajectory exceeded the event budget."""


class PreconditionViolation(RuntimeError):
    """An event was applied to a state that does not satisfy its entry condition."""


class UnsupportedConstraints(ValueError):
    """Sampler cannot handle this constraint type."""


class DegenerateSeries(ValueError):
    """Series is constant (or too degenerate) for autocorrelation analysis."""
