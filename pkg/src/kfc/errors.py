"""Exception hierarchy for the knowledge file container."""

from __future__ import annotations


class KfcError(Exception):
    """Base class for all errors raised by this package."""


class ContainerError(KfcError):
    """Problem with the container file itself."""


class ContainerExistsError(ContainerError):
    pass


class ForeignFileError(ContainerError):
    """The path holds data that is not a knowledge container."""


class UnsupportedVersionError(ContainerError):
    pass


class ReadOnlyError(ContainerError):
    pass


class IntegrityError(ContainerError):
    """A commit would break region consistency; the transaction was rolled back."""


class InjectedFault(KfcError):
    """Raised by the fault-injection hook to simulate a crash mid-commit."""


class ExtractionError(KfcError):
    """A single file could not be turned into text segments."""


class QueryError(KfcError, ValueError):
    pass


class EmptyQueryError(QueryError):
    pass


class DegenerateWeightsError(QueryError):
    pass


class BenchmarkError(KfcError):
    """A benchmark's embedded correctness check failed; timings are invalid."""
