"""Exception hierarchy and the process exit codes the CLI maps them to."""
from __future__ import annotations

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_PRECONDITION = 3


class FtevalError(Exception):
    """Base class for all toolkit errors."""


class IngestError(FtevalError):
    """Unreadable or malformed input file.

    The message always carries the file path plus a line number (text
    formats) or byte offset (binary formats) when one is known.
    """

    def __init__(self, message: str, *, path=None, line: int | None = None,
                 offset: int | None = None):
        loc = str(path) if path is not None else ""
        if line is not None:
            loc += f":{line}"
        if offset is not None:
            loc += f" (byte {offset})"
        super().__init__(f"{loc}: {message}" if loc else message)
        self.path = str(path) if path is not None else None
        self.line = line
        self.offset = offset


class ManifestError(FtevalError):
    """Invalid evaluation manifest (schema, duplicate ids, empty runs)."""


class ValidationError(FtevalError):
    """A domain-type invariant does not hold (shapes, finiteness, ranges)."""


class PreconditionError(FtevalError):
    """Inputs are individually valid but a metric's precondition fails."""


class NumericsError(FtevalError):
    """Numerical failure: invalid covariance or non-converging eigensolver."""


class IngestWarning(UserWarning):
    """Recoverable input oddity (non-padded frame names, truncation, ...)."""


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, (IngestError, ManifestError, FileNotFoundError, IsADirectoryError,
                        NotADirectoryError, PermissionError)):
        return EXIT_INPUT
    if isinstance(exc, (ValidationError, PreconditionError, NumericsError)):
        return EXIT_PRECONDITION
    return EXIT_PRECONDITION if isinstance(exc, FtevalError) else EXIT_USAGE
