"""Exception types shared across the toolkit."""


class MotionKitError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(MotionKitError, ValueError):
    """An input violates a documented precondition."""


class DimensionError(ValidationError):
    """An array has the wrong length or shape."""


class SingularRotationError(ValidationError):
    """A 6D rotation input is degenerate (zero or parallel columns)."""


class ContractError(MotionKitError, ValueError):
    """A call violates an API contract (wrong mask convention, missing data)."""


class RegistryError(MotionKitError, KeyError):
    """A dataset id is not registered with the model."""


class ParseError(MotionKitError, ValueError):
    """A motion file line could not be parsed."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line
