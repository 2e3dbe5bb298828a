"""Executor contract: submit one source snippet, get an ExecutionResult.

Two implementations: the in-process interpreter (the default) and a
client stub for a remote microVM execution service.  The stub pins the
wire contract (for deployments that must not run model code in-process)
without implementing the service itself.
"""
from __future__ import annotations

from typing import Protocol

from ..errors import ProviderUnavailable
from .interpreter import Session, execute
from .runtime import ExecutionResult, ResourceLimits


class Executor(Protocol):
    def submit(self, source: str) -> ExecutionResult: ...


class InProcessExecutor:
    """Runs snippets in this process against one persistent session."""

    def __init__(self, session: Session, limits: ResourceLimits | None = None):
        self.session = session
        self.limits = limits or session.limits

    def submit(self, source: str) -> ExecutionResult:
        return execute(self.session, source, self.limits)


class RemoteMicroVmExecutor:
    """Contract stub for a remote microVM sandbox service.

    Wire shape: POST {endpoint}/sessions/{session_id}/execute with
    {"source": ...} returning the ExecutionResult JSON encoding
    (see ExecutionResult.to_json).  Not implemented here; constructing it
    documents the split, submitting raises until a deployment provides
    the service endpoint.
    """

    def __init__(self, endpoint: str, session_id: str):
        self.endpoint = endpoint
        self.session_id = session_id

    def submit(self, source: str) -> ExecutionResult:
        raise ProviderUnavailable(
            "remote microVM executor is a contract stub; point `endpoint` at a "
            "deployment that implements POST /sessions/{id}/execute"
        )
