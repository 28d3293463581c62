"""Exception hierarchy shared by all modules."""


class ExtremalBranchError(Exception):
    """Base class for every error raised by this package."""


class DomainError(ExtremalBranchError, ValueError):
    """Argument outside the domain where the nonlinearity is defined."""


class ParameterError(ExtremalBranchError, ValueError):
    """Invalid numerical parameter (step size, exponent, grid size...)."""


class SingularOperatorError(ExtremalBranchError, ArithmeticError):
    """Zero pivot met while factoring a discrete operator."""


class NoConvergenceError(ExtremalBranchError, RuntimeError):
    """Iteration did not reach its tolerance within the iteration budget."""


class BlowUpError(NoConvergenceError):
    """Iterates reached the blow-up level s0 of the nonlinearity."""


class MonotonicityError(ExtremalBranchError, RuntimeError):
    """Monotone iteration produced a decreasing step."""


class ContinuationStalled(ExtremalBranchError, RuntimeError):
    """Arclength step underflow before the branch passed a fold."""


class ConfigError(ExtremalBranchError, ValueError):
    """Malformed or inconsistent run configuration."""
