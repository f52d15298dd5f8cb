"""Exception hierarchy shared across the toolkit.

The CLI maps these onto exit codes: schema/data problems exit 2,
backend (remote service) problems exit 3.
"""

from __future__ import annotations


class ReformkitError(Exception):
    """Base class for all toolkit errors."""


class CorpusSchemaError(ReformkitError):
    """A corpus record failed schema validation."""

    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        where = f"line {line}" if line is not None else "record"
        if field:
            where += f", field '{field}'"
        super().__init__(f"{where}: {message}")


class DataError(ReformkitError):
    """Input data cannot be processed (beyond per-record schema issues)."""


class NoTransitionsError(DataError):
    """No adjacent type pairs were observed in any dialogue piece."""


class DegenerateDistributionError(DataError):
    """All allowed types carry zero probability; nothing can be sampled."""


class SpliceMismatchError(DataError):
    """A simulated sequence does not line up with any human sequence."""


class AlignmentError(DataError):
    """Generated sequences and references could not be paired up."""


class BackendError(ReformkitError):
    """Base class for remote-backend failures."""


class BackendTransportError(BackendError):
    """The backend could not be reached (connection failure or timeout)."""


class BackendSchemaError(BackendError):
    """The backend answered with a payload violating the wire protocol."""


class BackendStatusError(BackendError):
    """The backend answered with a non-success HTTP status."""

    def __init__(self, status: int, message: str):
        self.status = status
        super().__init__(f"status {status}: {message}")


class ZeroCandidatesError(BackendError):
    """The backend answered successfully but produced no candidates."""
