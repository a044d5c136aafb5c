"""Exception hierarchy shared across the package."""


class MimoSinrError(Exception):
    """Base class for all package errors."""


class UsageError(MimoSinrError, ValueError):
    """Invalid arguments or preconditions supplied by the caller."""


class DomainError(MimoSinrError, ValueError):
    """Argument outside the mathematical domain of a function."""


class ConvergenceError(MimoSinrError, RuntimeError):
    """Adaptive quadrature exhausted its subdivision budget.

    Carries the partial value and the error estimate reached when the
    budget ran out, and the SINR point being evaluated when known.
    """

    def __init__(self, message, value=float("nan"), error=float("nan"), gamma=None):
        if gamma is not None:
            message = f"{message} (gamma={gamma!r})"
        super().__init__(message)
        self.value = value
        self.error = error
        self.gamma = gamma
