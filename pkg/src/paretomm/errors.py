"""Exception types shared across the package."""


class InvalidArgumentError(ValueError):
    """An argument violates a documented precondition."""


class ConfigurationError(ValueError):
    """Required constants or solver settings are missing or inconsistent."""


class NumericalFailureError(RuntimeError):
    """Non-finite values or a Hessian that is not positive definite."""


class BudgetExceededError(RuntimeError):
    """An iteration budget ran out before the requested tolerance.

    Carries the best iterate seen and its convergence metric (gradient
    norm or stationarity gap, depending on the solver).
    """

    def __init__(self, message, best=None, metric=None, trace=None):
        super().__init__(message)
        self.best = best
        self.metric = metric
        self.trace = trace


class InfeasibleError(RuntimeError):
    """A constraint system has an empty feasible set."""


class SizeLimitError(ValueError):
    """A combinatorial guard tripped (too many objectives or lattice points)."""
