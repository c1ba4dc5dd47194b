"""Exception hierarchy."""


class WidemapError(Exception):
    """Base class for all library errors."""


class ContractError(WidemapError, ValueError):
    """A documented precondition was violated by the caller."""


class ConsistencyError(ContractError):
    """Caller-supplied information disagrees with what was computed."""


class WidthError(WidemapError, TypeError):
    """An entry point was used with the wrong global index width."""


class WidthStateError(WidthError):
    """The object has an invalid (default-constructed) width state."""


class WidthMixError(WidthError):
    """Objects with 32-bit and 64-bit global indices were combined."""


class WidthRangeError(WidthError, OverflowError):
    """A value does not fit in the requested global index width."""


class BuildModeError(WidthError):
    """The requested width was excluded from this build."""


class NotOwnedError(WidemapError, KeyError):
    """A global index is not owned by the calling rank."""

    def __str__(self):
        return Exception.__str__(self)


class LifecycleError(WidemapError, RuntimeError):
    """Operation not allowed in the object's current state (e.g. after fill)."""


class InvalidColumnError(WidemapError, ValueError):
    """A column index could not be located in the domain map."""


class CapacityError(WidemapError, ValueError):
    """A caller-provided buffer is too small.

    ``required`` holds the number of entries the buffer must hold.
    """

    def __init__(self, required, capacity):
        super().__init__(f"buffer holds {capacity} entries, {required} required")
        self.required = required
        self.capacity = capacity


class ParseError(WidemapError, ValueError):
    """Malformed input file. ``line`` is 1-based, or None."""

    def __init__(self, message, line=None, path=None):
        where = f"line {line}" if line is not None else "?"
        if path is not None:
            where = f"{path}:{where}"
        super().__init__(f"{where}: {message}")
        self.line = line
        self.path = path


class RankAborted(WidemapError, RuntimeError):
    """Another rank failed while this rank was blocked in communication."""


class UsageError(ContractError):
    """Bad argument to a communicator call (e.g. a root rank out of range)."""
