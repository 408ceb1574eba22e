"""Exception hierarchy. Each class maps to one CLI exit code."""


class MinMarkovError(Exception):
    """Base class for all errors raised by the package."""

    exit_code = 1


class InputError(MinMarkovError, ValueError):
    """Malformed or inconsistent input (tables, probabilities, schemas)."""

    exit_code = 2


class DomainError(InputError):
    """A numerical precondition is violated (nonpositive weights, zero variance, ...)."""


class ResourceError(MinMarkovError):
    """The requested lifted state space exceeds the configured cap."""

    exit_code = 3


class ConvergenceError(MinMarkovError):
    """An iterative solver stopped before reaching its tolerance."""

    exit_code = 4

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class UnattainableMomentsError(ConvergenceError):
    """The natural parameter escaped to infinity: the target moments are
    outside (or on the boundary of) the attainable set."""

    def __init__(self, message, components=None, residual=None, iterations=None):
        super().__init__(message, residual=residual, iterations=iterations)
        self.components = list(components or [])


class UnobservedStateError(InputError):
    """Some states never occur in the data, so the empirical marginal is on the
    boundary of the simplex."""

    exit_code = 5

    def __init__(self, missing):
        self.missing = list(missing)
        super().__init__(f"states never observed in the series: {self.missing}")


class VerificationError(MinMarkovError):
    exit_code = 6
