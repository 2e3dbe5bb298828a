"""Secure-by-design interpreter for LLM-generated analysis code."""
from .artifacts import ARTIFACT_KINDS, Artifact, ArtifactError, make_artifact, validate_artifact
from .executor import Executor, InProcessExecutor, RemoteMicroVmExecutor
from .interpreter import Interpreter, Session, execute, frame_from_payload
from .parser import ParseError, Program, UnsupportedConstruct, parse
from .runtime import ExecutionResult, ResourceLimits
from .values import Frame, GeocodeMiss, Grouped, Row

__all__ = [
    "ARTIFACT_KINDS",
    "Artifact",
    "ArtifactError",
    "ExecutionResult",
    "Executor",
    "Frame",
    "GeocodeMiss",
    "Grouped",
    "InProcessExecutor",
    "Interpreter",
    "ParseError",
    "Program",
    "RemoteMicroVmExecutor",
    "ResourceLimits",
    "Row",
    "Session",
    "UnsupportedConstruct",
    "execute",
    "frame_from_payload",
    "make_artifact",
    "parse",
    "validate_artifact",
]
