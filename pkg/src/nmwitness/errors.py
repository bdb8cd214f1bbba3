"""Exception types raised across the package."""


class NMWitnessError(Exception):
    """Base class for all package errors."""


class InvariantError(NMWitnessError, ValueError):
    """An input violates a structural invariant (Hermiticity, trace, positivity...)."""


class DimensionError(NMWitnessError, ValueError):
    pass


class ParameterError(NMWitnessError, ValueError):
    pass


class DomainError(NMWitnessError, ValueError):
    pass


class SingularityError(NMWitnessError, ValueError):
    """Raised when a time lies too close to a point where tan(2 tau) diverges.

    ``tau_singular`` carries the nearest offending point, ``tau`` the request.
    """

    def __init__(self, message, tau=None, tau_singular=None):
        super().__init__(message)
        self.tau = tau
        self.tau_singular = tau_singular


class ConvergenceError(NMWitnessError, ArithmeticError):
    def __init__(self, message, estimates=()):
        super().__init__(message)
        self.estimates = tuple(estimates)


class BudgetError(NMWitnessError, RuntimeError):
    pass


class ConfigError(NMWitnessError, ValueError):
    """Invalid scan configuration; ``field`` names the offending option."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
