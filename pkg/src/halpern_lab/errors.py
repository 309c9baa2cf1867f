"""Exception hierarchy shared by all modules."""


class ContractViolation(ValueError):
    """An argument broke an operation's stated contract (dimension, range)."""


class InvalidSetError(ContractViolation):
    """Parameters do not describe a nonempty closed convex set."""


class PreconditionError(ContractViolation):
    """A point-level precondition failed, e.g. a witness outside a fixed set."""


class UsageError(ContractViolation):
    """Arguments were combined in a way the operation does not support."""


class ConfigurationError(ContractViolation):
    """An experiment configuration is invalid.

    ``key`` names the offending configuration entry when known.
    """

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class SamplingFailure(RuntimeError):
    """No feasible probe point could be generated."""


class NumericFailure(RuntimeError):
    """A non-finite value appeared in an iterate.

    Carries the last finite iterate and its index.
    """

    def __init__(self, message, last_point=None, n=None):
        super().__init__(message)
        self.last_point = last_point
        self.n = n
