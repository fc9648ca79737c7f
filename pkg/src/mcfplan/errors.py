"""Exception types shared across the package."""


class McfplanError(Exception):
    """Base class for all package-specific errors."""


class ParseError(McfplanError, ValueError):
    """Malformed input text. Carries the 1-based line number when known."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class TopologyError(McfplanError, ValueError):
    """Structurally invalid network graph (disconnected, duplicate link, ...)."""


class UnreachableError(McfplanError):
    """No path exists between the requested endpoints."""


class CapacityError(McfplanError):
    """The per-link fiber cap would be exceeded."""


class CommitError(McfplanError):
    """A lightpath commitment precondition failed; state was not modified."""


class InfeasibleError(McfplanError):
    """A demand cannot be served at all under the current limits."""


class SearchSpaceError(McfplanError):
    """An exact search was refused or aborted (size estimate or time limit)."""
