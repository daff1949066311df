"""Exception types shared across the package."""


class FlwError(Exception):
    """Base class for every error raised by flwlab."""


class ParseError(FlwError):
    pass


class MissingConnective(FlwError):
    pass


class NotFlattenable(FlwError):
    pass


class NotStructural(FlwError):
    pass


class NotRegular(FlwError):
    pass


class NotInAlphabet(FlwError):
    pass


class InvalidInput(FlwError):
    pass


class InvalidTrace(FlwError):
    pass


class InternalInvariantViolated(FlwError):
    """A proven property failed at runtime; always a bug."""


class BudgetExceeded(FlwError):
    """Raised when saturation runs out of time or frontier budget.

    The partially saturated state is attached as ``state``.
    """

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state
