"""Typed errors shared across the engine.

The service layer maps these onto HTTP status codes and the CLI onto exit
codes, so every failure mode the engine can surface is a subclass of
:class:`QueryflowError` with a stable machine-readable ``kind``. Errors that
escape a pipeline step carry the step name in ``step``.
"""

from __future__ import annotations


class QueryflowError(Exception):
    """Base class for all engine errors."""

    kind = "error"

    def __init__(self, message: str = "", *, step: str | None = None):
        super().__init__(message)
        self.step = step

    @property
    def message(self) -> str:
        return str(self)


class MalformedUrl(QueryflowError):
    """A web command rule matched but its operand is not an absolute http(s) URL."""

    kind = "malformed_url"


class BackendUnavailable(QueryflowError):
    """An upstream backend (LLM, search, feed, network) failed or is unreachable."""

    kind = "backend_unavailable"

    def __init__(self, message: str = "", *, step: str | None = None, retryable: bool = False):
        super().__init__(message, step=step)
        self.retryable = retryable


class Timeout(QueryflowError):
    """A call exceeded its wall-clock bound."""

    kind = "timeout"


class UnknownBackend(QueryflowError):
    kind = "unknown_backend"


class MissingBinding(QueryflowError):
    """A template placeholder had no binding at render time."""

    kind = "missing_binding"

    def __init__(self, name: str, *, step: str | None = None):
        super().__init__(f"no binding for placeholder {name!r}", step=step)
        self.name = name


class EmptyChains(QueryflowError):
    """Self-consistency voting was asked to vote over zero chains."""

    kind = "empty_chains"


class HttpError(QueryflowError):
    """A page fetch returned a non-success HTTP status."""

    kind = "http_error"

    def __init__(self, status: int, message: str = "", *, step: str | None = None):
        super().__init__(message or f"HTTP {status}", step=step)
        self.status = status


class NotHtml(QueryflowError):
    kind = "not_html"


class TooLarge(QueryflowError):
    kind = "too_large"


class QuotaExceeded(QueryflowError):
    kind = "quota_exceeded"


class StoreCorrupt(QueryflowError):
    """The cache persistence file cannot be read at all."""

    kind = "store_corrupt"


class StoreIoFailure(QueryflowError):
    """Appending to the cache persistence file failed; the entry was not stored."""

    kind = "store_io_failure"


class MirrorUnavailable(QueryflowError):
    kind = "mirror_unavailable"


class DatasetParseError(QueryflowError):
    """A benchmark dataset line is malformed; carries the 1-based line number."""

    kind = "parse_error"

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class DuplicateId(QueryflowError):
    kind = "duplicate_id"

    def __init__(self, example_id: str):
        super().__init__(f"duplicate example id {example_id!r}")
        self.example_id = example_id
