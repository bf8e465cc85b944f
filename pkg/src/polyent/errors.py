"""Exception hierarchy shared by every module."""


class PolyentError(Exception):
    """Base class for all library errors."""


class InputError(PolyentError, ValueError):
    """Invalid argument: bad parameter, dimension mismatch, unknown family."""


class ResourceError(PolyentError, RuntimeError):
    """An enumeration would exceed its configured cap."""

    def __init__(self, message: str, required: int | None = None):
        super().__init__(message)
        self.required = required


class InvariantError(PolyentError, AssertionError):
    """An internal invariant was violated (a bug or a mis-declared map)."""
