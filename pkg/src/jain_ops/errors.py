"""Exception types shared across the package."""


class ParameterDomainError(ValueError):
    """A parameter lies outside the operator family's validity window."""


class TruncationError(RuntimeError):
    """The adaptive series truncation hit its hard cap before converging."""

    def __init__(self, message, partial_sum=None, k_reached=None):
        super().__init__(message)
        self.partial_sum = partial_sum
        self.k_reached = k_reached


class NondifferentiableError(ValueError):
    """A derivative was requested where the function has none."""


class UnsupportedOrderError(ValueError):
    """A closed form was requested for an order that has none."""


class ConditionError(ValueError):
    """A theorem's hypothesis is violated by the supplied arguments."""
