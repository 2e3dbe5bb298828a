"""Shared exception taxonomy.

Every subsystem raises subclasses of OpenDataQAError so callers can catch
one base type at process boundaries.  Exceptions carry the identifiers a
caller needs to act (dataset id, column, call id) as attributes.
"""
from __future__ import annotations


class OpenDataQAError(Exception):
    """Base class for all errors raised by this package."""


# -- catalog ---------------------------------------------------------------

class CatalogError(OpenDataQAError):
    pass


class ManifestNotFound(CatalogError):
    def __init__(self, path: str):
        super().__init__(f"catalog manifest not found: {path}")
        self.path = path


class SchemaViolation(CatalogError):
    """A metadata document failed validation. `pointer` is a JSON pointer."""

    def __init__(self, doc_id: str, pointer: str, reason: str):
        super().__init__(f"metadata {doc_id!r}: {pointer}: {reason}")
        self.doc_id = doc_id
        self.pointer = pointer
        self.reason = reason


class DuplicateId(CatalogError):
    def __init__(self, dataset_id: str):
        super().__init__(f"duplicate dataset id: {dataset_id!r}")
        self.dataset_id = dataset_id


class UnknownDataset(CatalogError):
    def __init__(self, dataset_id: str):
        super().__init__(f"unknown dataset id: {dataset_id!r}")
        self.dataset_id = dataset_id


class PayloadUnreadable(CatalogError):
    def __init__(self, dataset_id: str, reason: str):
        super().__init__(f"payload for {dataset_id!r} unreadable: {reason}")
        self.dataset_id = dataset_id
        self.reason = reason


class PayloadTypeMismatch(CatalogError):
    """A payload cell does not parse as its declared column type."""

    def __init__(self, column: str, row_index: int, value: str):
        super().__init__(
            f"column {column!r}, row {row_index}: value {value!r} does not match declared type"
        )
        self.column = column
        self.row_index = row_index
        self.value = value


# -- embedding index -------------------------------------------------------

class EmbeddingError(OpenDataQAError):
    pass


class EmptyText(EmbeddingError):
    def __init__(self):
        super().__init__("cannot embed empty text")


class DimMismatch(EmbeddingError):
    def __init__(self, dim_a: int, dim_b: int):
        super().__init__(f"vector dims differ: {dim_a} vs {dim_b}")
        self.dim_a = dim_a
        self.dim_b = dim_b


class ZeroVector(EmbeddingError):
    def __init__(self):
        super().__init__("cosine similarity undefined for zero-norm vector")


class EmptyIndex(EmbeddingError):
    def __init__(self):
        super().__init__("nearest-neighbor search on an empty index")


# -- llm gateway -----------------------------------------------------------

class GatewayError(OpenDataQAError):
    pass


class ProviderUnavailable(GatewayError):
    def __init__(self, reason: str = "provider unavailable"):
        super().__init__(reason)
        self.reason = reason


class RateLimited(GatewayError):
    def __init__(self, retry_after: float = 1.0):
        super().__init__(f"rate limited, retry after {retry_after}s")
        self.retry_after = retry_after


class MalformedToolArguments(GatewayError):
    def __init__(self, call_id: str, reason: str):
        super().__init__(f"tool call {call_id}: {reason}")
        self.call_id = call_id
        self.reason = reason


class ContextOverflow(GatewayError):
    def __init__(self, reason: str = "context window exceeded"):
        super().__init__(reason)


class UnknownModel(GatewayError):
    def __init__(self, model_id: str):
        super().__init__(f"no pricing entry for model {model_id!r}")
        self.model_id = model_id


class ScriptError(GatewayError):
    """A scripted-provider turn assertion failed (test-script bug)."""


# -- retrieval -------------------------------------------------------------

class UnreadablePdf(OpenDataQAError):
    def __init__(self, reason: str):
        super().__init__(f"cannot read PDF: {reason}")
        self.reason = reason


# -- sandbox registration --------------------------------------------------

class SandboxSetupError(OpenDataQAError):
    pass


class NameCollision(SandboxSetupError):
    def __init__(self, name: str):
        super().__init__(f"name already bound in session: {name!r}")
        self.name = name


class InvalidIdentifier(SandboxSetupError):
    def __init__(self, name: str):
        super().__init__(f"not a valid identifier: {name!r}")
        self.name = name


# -- bench -----------------------------------------------------------------

class BenchError(OpenDataQAError):
    pass


class UnboundPlaceholder(BenchError):
    def __init__(self, template_id: str, name: str):
        super().__init__(f"template {template_id!r}: placeholder {{{name}}} not bound")
        self.template_id = template_id
        self.name = name


# -- config ----------------------------------------------------------------

class ConfigError(OpenDataQAError):
    pass
