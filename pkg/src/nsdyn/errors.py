"""Exception types shared across the toolkit."""


class ToolkitError(Exception):
    """Base class for all errors raised by this package."""


class ConstructionError(ToolkitError):
    """A space, action, or extension failed its construction-time checks.

    When the failure comes from a verification precondition (for example a
    cocycle check), the offending report is attached as ``report``.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class DomainError(ToolkitError):
    """An atom or function was used outside the space it belongs to."""


class InvalidInputError(ToolkitError):
    """Arguments violate a documented precondition."""


class UnsupportedInputError(ToolkitError):
    """The operation needs information the caller did not supply."""


class DegenerateInputError(ToolkitError):
    """The input is identically zero where a positive function is required."""


class ExplorationLimitError(ToolkitError):
    """A lazy orbit walk exceeded the action's exploration budget."""

    def __init__(self, message, axis=None, t=None):
        super().__init__(message)
        self.axis = axis
        self.t = t
