"""Exception types shared across the package."""


class InvalidParameterError(ValueError):
    """An argument violates a documented precondition."""


class TruncationError(RuntimeError):
    """A truncated-basis computation leaked more probability mass than allowed."""

    def __init__(self, message: str, leaked_mass: float | None = None):
        super().__init__(message)
        self.leaked_mass = leaked_mass
