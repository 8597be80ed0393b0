"""Exception types shared across the library."""


class PlapeigenError(Exception):
    """Base class for all library-specific errors."""


class DomainError(PlapeigenError, ValueError):
    """Invalid parameter or argument outside the mathematical domain."""


class SingularEndpointError(DomainError):
    """Evaluation requested exactly at a singular endpoint of a drift.

    Signals the caller to use the regularized start instead of a direct
    evaluation.
    """


class IntegrationFailureError(PlapeigenError, RuntimeError):
    """The adaptive integrator could not continue (step-size underflow).

    Carries the last valid state as ``last_state`` = (t, phi, log_e).
    """

    def __init__(self, message, last_state=None):
        super().__init__(message)
        self.last_state = last_state


class BracketFailureError(PlapeigenError, RuntimeError):
    """No sign change found while growing an eigenvalue bracket."""


class BelowLambda0Error(PlapeigenError, RuntimeError):
    """Family-0 odd shot stalled: the requested lambda is <= lambda_0."""


class InconclusiveError(PlapeigenError, RuntimeError):
    """A classifier could not decide within its horizon; carries diagnostics."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class StateError(PlapeigenError, ValueError):
    """An operation was applied to an object in an unsuitable state."""


class MonotonicityError(PlapeigenError, RuntimeError):
    """A sweep violated a monotonicity contract (strict mode)."""


class ConvergenceError(PlapeigenError, RuntimeError):
    """An iterative solver failed to reach its tolerance within its budget."""


