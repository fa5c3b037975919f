class BlfrError(Exception):
    """Base class for errors raised by this package."""


class DomainError(BlfrError, ValueError):
    """An argument lies outside the domain of the function."""


class ConvergenceError(BlfrError, ArithmeticError):
    """An iterative evaluation did not reach its tolerance.

    Attributes
    ----------
    partial_sum : float
        Value accumulated before giving up.
    n_terms : int
        Number of terms or iterations consumed.
    """

    def __init__(self, message, partial_sum=float("nan"), n_terms=0):
        super().__init__(message)
        self.partial_sum = partial_sum
        self.n_terms = n_terms


class NonConvergenceError(BlfrError, RuntimeError):
    """No optimizer start reached an interior stationary point."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or []


class GeneratorFault(BlfrError, RuntimeError):
    """The variate generator produced too many unusable draws."""


class OptimizerFailure(BlfrError, RuntimeError):
    """Fitted likelihoods are inconsistent with the nesting of the models."""
