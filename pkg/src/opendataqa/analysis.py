"""CodeAct-style analysis loop.

Each step the model states a plan and one fenced code block; the code
runs in the persistent sandbox session and the execution result (output
or error message) is appended to the model context, so the model can
self-correct.  The loop ends when generated code calls final_answer(...),
when the step budget runs out (the user then gets an explicit
no-reliable-answer text, never a guess), or on provider failure.

Groundedness by construction: the model context contains nothing but the
question, dataset metadata, the prompts, and execution results.
"""
from __future__ import annotations

import re
import time
from dataclasses import dataclass, field
from importlib import resources

from .catalog import DatasetMetadata, DatasetPayload
from .errors import GatewayError, NameCollision
from .gateway import ChatMessage, Gateway, Usage
from .interpreter import Artifact, ExecutionResult, Session, frame_from_payload
from .interpreter.values import render_plain
from .retrieval import UserQuestion

_CODE_BLOCK_RE = re.compile(r"```(?:python|py)?\s*\n(.*?)```", re.DOTALL)

NO_ANSWER_TEXT = (
    "I could not produce a reliable answer to this question within the "
    "allotted analysis steps, so I am not going to guess. Please try a "
    "simpler or more specific formulation."
)
PROVIDER_FAILURE_TEXT = (
    "The analysis could not be completed because the language-model "
    "provider was unavailable. Please try again later."
)


@dataclass
class AnalysisConfig:
    model: str = "gpt-4.1"
    max_steps: int = 20
    sample_rows: int = 5


@dataclass
class AgentStep:
    index: int  # 1-based
    plan: str
    code: str
    result: ExecutionResult

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "plan": self.plan,
            "code": self.code,
            "result": self.result.to_json(),
        }


@dataclass
class FinalAnswer:
    text: str
    artifacts: list[Artifact]
    steps: list[AgentStep]
    usage: Usage
    latency_s: float
    terminated_by: str  # final_answer_tool | max_steps | provider_failure
    warnings: list[str] = field(default_factory=list)


def sanitize_dataset_name(dataset_id: str, taken) -> str:
    """Turn a dataset id into an unbound sandbox identifier."""
    name = re.sub(r"\W", "_", dataset_id)
    if not name or name[0].isdigit():
        name = f"d_{name}"
    base = name
    counter = 2
    while name in taken:
        name = f"{base}_{counter}"
        counter += 1
    return name


def register_datasets(
    session: Session,
    datasets: list[tuple[DatasetMetadata, DatasetPayload]],
) -> dict[str, str]:
    """Bind payloads as frames; returns dataset id -> sandbox name.
    Datasets already registered under their name are left untouched."""
    names: dict[str, str] = {}
    for meta, payload in datasets:
        name = sanitize_dataset_name(meta.id, set())
        if name in session.datasets:
            names[meta.id] = name
            continue
        name = sanitize_dataset_name(meta.id, session.datasets.keys() | session.globals.bindings.keys())
        try:
            session.register_dataset(name, frame_from_payload(payload))
        except NameCollision:
            continue
        names[meta.id] = name
    return names


def _sample_rows(payload: DatasetPayload, n: int) -> str:
    frame = frame_from_payload(payload)
    lines = ["  | " + " | ".join(frame.columns)]
    for row in frame.rows[:n]:
        lines.append("  | " + " | ".join(render_plain(v) for v in row))
    if len(frame.rows) > n:
        lines.append(f"  ({len(frame.rows) - n} more rows)")
    return "\n".join(lines)


def _dataset_block(meta: DatasetMetadata, payload: DatasetPayload, name: str, sample_rows: int) -> str:
    fields = "\n".join(
        f"  - {f.name} ({f.type_hint}): {f.description}" for f in meta.fields
    ) or "  (no declared fields)"
    crs = f" CRS: {payload.crs}." if payload.crs else ""
    return (
        f"### {name}\n"
        f"Title: {meta.title}\n"
        f"Summary: {meta.summary}\n"
        f"Rows: {len(payload.rows)}.{crs}\n"
        f"Fields:\n{fields}\n"
        f"Sample:\n{_sample_rows(payload, sample_rows)}"
    )


def build_system_prompt(
    datasets: list[tuple[DatasetMetadata, DatasetPayload]],
    names: dict[str, str],
    sample_rows: int,
) -> str:
    template = resources.files("opendataqa.assets.prompts").joinpath("analysis_system.txt").read_text("utf-8")
    reference = resources.files("opendataqa.assets").joinpath("language_reference.md").read_text("utf-8")
    blocks = [
        _dataset_block(meta, payload, names[meta.id], sample_rows)
        for meta, payload in datasets
        if meta.id in names
    ]
    return template.format(language_reference=reference, datasets="\n\n".join(blocks))


def split_plan_and_code(reply_text: str) -> tuple[str, str | None, int]:
    """Returns (plan, code or None, number of code blocks in the turn)."""
    blocks = _CODE_BLOCK_RE.findall(reply_text)
    if not blocks:
        return reply_text.strip(), None, 0
    plan = reply_text[: reply_text.index("```")].strip()
    return plan, blocks[0].strip(), len(blocks)


def _format_observation(result: ExecutionResult) -> str:
    lines = [f"Execution result: status={result.status}"]
    if result.log:
        lines.append("Output:\n" + result.log.rstrip("\n"))
    if result.value is not None:
        lines.append("Value: " + result.value)
    if result.error_message:
        lines.append("Error: " + result.error_message)
    if result.output_truncated:
        lines.append("(output truncated)")
    if not result.log and result.value is None and not result.error_message:
        lines.append("(no output; use print() to observe values)")
    return "\n".join(lines)


def analyze(
    question: UserQuestion,
    datasets: list[tuple[DatasetMetadata, DatasetPayload]],
    gateway: Gateway,
    session: Session,
    config: AnalysisConfig | None = None,
    on_event=None,
) -> FinalAnswer:
    """Run the plan/code/execute/observe loop until final_answer or budget."""
    if not datasets:
        raise ValueError("analyze needs at least one dataset (k >= 1)")
    config = config or AnalysisConfig()
    emit = on_event or (lambda kind, payload: None)
    started = time.monotonic()

    names = register_datasets(session, datasets)
    system_prompt = build_system_prompt(datasets, names, config.sample_rows)
    messages: list[ChatMessage] = [ChatMessage.text("system", system_prompt), question.to_message()]

    steps: list[AgentStep] = []
    warnings: list[str] = []
    usage_total = Usage()
    artifacts: list[Artifact] = []

    for index in range(1, config.max_steps + 1):
        try:
            reply, usage = gateway.complete(messages, (), config.model)
        except GatewayError as exc:
            warnings.append(f"provider failure at step {index}: {exc}")
            return FinalAnswer(
                text=PROVIDER_FAILURE_TEXT,
                artifacts=artifacts,
                steps=steps,
                usage=usage_total,
                latency_s=time.monotonic() - started,
                terminated_by="provider_failure",
                warnings=warnings,
            )
        usage_total = usage_total + usage
        messages.append(reply)

        plan, code, n_blocks = split_plan_and_code(reply.text_content())
        if n_blocks > 1:
            warnings.append(f"step {index}: {n_blocks} code blocks in one turn; only the first ran")
        if code is None:
            result = ExecutionResult(
                status="syntax_error",
                error_message="no fenced code block in reply; answer with a plan and one ``` block",
            )
            step = AgentStep(index=index, plan=plan, code="", result=result)
            steps.append(step)
            emit("step_started", {"index": index, "plan": plan, "code": ""})
            emit("step_result", {"index": index, "status": result.status, "error": result.error_message})
            messages.append(ChatMessage.text("user", _format_observation(result)))
            continue

        emit("step_started", {"index": index, "plan": plan, "code": code})
        result = _execute_code(session, code)
        steps.append(AgentStep(index=index, plan=plan, code=code, result=result))
        artifacts.extend(result.artifacts)
        emit(
            "step_result",
            {
                "index": index,
                "status": result.status,
                "log": result.log[-2000:],
                "error": result.error_message,
                "ops_used": result.ops_used,
            },
        )

        if result.final_answer is not None:
            final_artifacts = artifacts + [Artifact(kind, payload) for kind, payload in result.final_answer]
            texts = [payload for kind, payload in result.final_answer if kind == "text"]
            text = "\n".join(texts) if texts else "Results attached."
            return FinalAnswer(
                text=text,
                artifacts=final_artifacts,
                steps=steps,
                usage=usage_total,
                latency_s=time.monotonic() - started,
                terminated_by="final_answer_tool",
                warnings=warnings,
            )

        messages.append(ChatMessage.text("user", _format_observation(result)))

    return FinalAnswer(
        text=NO_ANSWER_TEXT,
        artifacts=artifacts,
        steps=steps,
        usage=usage_total,
        latency_s=time.monotonic() - started,
        terminated_by="max_steps",
        warnings=warnings,
    )


def _execute_code(session: Session, code: str) -> ExecutionResult:
    from .interpreter import execute

    return execute(session, code)
