"""Exception and warning types shared across the package."""


class BeltramiLabError(Exception):
    """Base class for all package errors."""


class InvalidGrid(BeltramiLabError):
    """Grid parameters violate the N-power-of-two / S >= 2 contract."""


class UnsupportedField(BeltramiLabError):
    """A field fails the effective-support precondition of an operator."""


class FrequencyOverflow(BeltramiLabError):
    """A requested modulation exceeds the Nyquist margin of the grid."""


class EllipticityViolation(BeltramiLabError):
    """Coefficients violate |mu|+|nu| <= kappa < 1 or a conductivity leaves [1/K, K]."""


class MaxIterExceeded(BeltramiLabError):
    """Fixed-point iteration did not reach the requested tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class NoConvergence(BeltramiLabError):
    """Outer nonlinear iteration stalled; carries a summary of the iterate history."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = history or []


class MismatchedSolutions(BeltramiLabError):
    """Two solutions that must share (grid, k, lambda) do not."""


class OutOfDomain(BeltramiLabError):
    """A composed map leaves the interior margin of the grid box."""


class MeshTooCoarse(BeltramiLabError):
    """The finite element mesh cannot resolve the coefficient's features."""


class SolverFailure(BeltramiLabError):
    """Sparse factorization or linear solve failed."""


class DimensionMismatch(BeltramiLabError):
    """Operator matrices have incompatible truncation orders."""


class UnknownScenario(BeltramiLabError):
    """Requested experiment scenario is not registered."""


class TargetUnreachable(BeltramiLabError):
    """Clamping destroyed too much of the requested coefficient norm."""


class SupportWarning(UserWarning):
    """More than the allowed share of a field's mass lies near the box edge."""
