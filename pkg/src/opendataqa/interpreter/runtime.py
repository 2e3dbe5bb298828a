"""Shared runtime machinery of the sandbox: error kinds, control-flow
signals, resource limits, and the execution result record.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .artifacts import Artifact

# model-facing error kinds carried in ExecutionResult.error_message
ERROR_KINDS = (
    "ImportDenied",
    "SubmoduleAccessDenied",
    "NameUndefined",
    "TypeMismatch",
    "DivisionByZero",
    "IndexOutOfRange",
    "OperationCapExceeded",
    "CollectionTooLarge",
    "RecursionTooDeep",
)


class SandboxError(Exception):
    """Runtime error inside sandboxed code; caught at the execute boundary."""

    def __init__(self, kind: str, message: str, line: int | None = None):
        super().__init__(f"{kind}: {message}")
        self.kind = kind
        self.message = message
        self.line = line


class OpsExceeded(Exception):
    pass


class BreakSignal(Exception):
    pass


class ContinueSignal(Exception):
    pass


class ReturnSignal(Exception):
    def __init__(self, value):
        super().__init__()
        self.value = value


class FinalAnswerSignal(Exception):
    """Raised by final_answer(); stops execution with the collected results."""

    def __init__(self, results: list):
        super().__init__()
        self.results = results


@dataclass(frozen=True)
class ResourceLimits:
    max_ops: int = 10_000_000
    max_collection_len: int = 1_000_000
    max_output_chars: int = 20_000

    def __post_init__(self):
        for name in ("max_ops", "max_collection_len", "max_output_chars"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class ExecutionResult:
    status: str  # ok | syntax_error | runtime_error | resource_exhausted
    log: str = ""
    value: str | None = None
    error_message: str | None = None
    ops_used: int = 0
    artifacts: list[Artifact] = field(default_factory=list)
    final_answer: list | None = None  # list of (kind, payload) when called
    output_truncated: bool = False

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "log": self.log,
            "value": self.value,
            "error_message": self.error_message,
            "ops_used": self.ops_used,
            "artifacts": [a.to_json() for a in self.artifacts],
            "final_answer": [[k, p] for k, p in self.final_answer] if self.final_answer else None,
            "output_truncated": self.output_truncated,
        }
