"""Provider-agnostic chat completion access with tool calling.

Two providers ship with the package: an HTTPS client for the common
chat-completions endpoint shape, and a scripted provider that replays
canned assistant turns so every agent loop in this repository can run
deterministically offline.  The gateway layer adds retry with exponential
backoff, tool-argument validation, token accounting, and the per-model
cost table.
"""
from __future__ import annotations

import json
import logging
import math
import os
import threading
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Sequence

from .errors import (
    ContextOverflow,
    MalformedToolArguments,
    ProviderUnavailable,
    RateLimited,
    ScriptError,
    UnknownModel,
)

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Message model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TextPart:
    text: str


@dataclass(frozen=True)
class ImagePart:
    base64_data: str
    media_type: str = "image/png"


@dataclass(frozen=True)
class DocumentPart:
    markdown: str


Part = TextPart | ImagePart | DocumentPart


@dataclass
class ToolCall:
    id: str
    name: str
    arguments: dict
    invalid_reason: str | None = None


@dataclass(frozen=True)
class ToolSpec:
    name: str
    description: str
    parameters: dict  # JSON-schema object for the arguments


@dataclass
class ChatMessage:
    role: str  # system | user | assistant | tool
    parts: list[Part] = field(default_factory=list)
    tool_calls: list[ToolCall] = field(default_factory=list)
    tool_call_id: str | None = None

    def __post_init__(self):
        if self.role not in ("system", "user", "assistant", "tool"):
            raise ValueError(f"bad role: {self.role!r}")
        if self.role == "tool" and not self.tool_call_id:
            raise ValueError("tool messages need a tool_call_id")

    @classmethod
    def text(cls, role: str, text: str, tool_call_id: str | None = None) -> "ChatMessage":
        return cls(role=role, parts=[TextPart(text)], tool_call_id=tool_call_id)

    def text_content(self) -> str:
        chunks = []
        for part in self.parts:
            if isinstance(part, TextPart):
                chunks.append(part.text)
            elif isinstance(part, DocumentPart):
                chunks.append(part.markdown)
        return "\n".join(chunks)


@dataclass(frozen=True)
class Usage:
    input_tokens: int = 0
    output_tokens: int = 0
    reasoning_tokens: int = 0

    def __post_init__(self):
        for name in ("input_tokens", "output_tokens", "reasoning_tokens"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    def __add__(self, other: "Usage") -> "Usage":
        return Usage(
            self.input_tokens + other.input_tokens,
            self.output_tokens + other.output_tokens,
            self.reasoning_tokens + other.reasoning_tokens,
        )

    def total(self) -> int:
        return self.input_tokens + self.output_tokens + self.reasoning_tokens

    def to_json(self) -> dict:
        return {
            "input_tokens": self.input_tokens,
            "output_tokens": self.output_tokens,
            "reasoning_tokens": self.reasoning_tokens,
        }


# ---------------------------------------------------------------------------
# Pricing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelPricing:
    model_id: str
    name: str
    developer: str
    thinking: bool
    usd_per_m_input: float
    usd_per_m_output: float
    params: str | None = None

    def __post_init__(self):
        if self.usd_per_m_input < 0 or self.usd_per_m_output < 0:
            raise ValueError("prices must be >= 0")


class PricingTable:
    def __init__(self, models: Sequence[ModelPricing]):
        self._by_id = {m.model_id: m for m in models}

    def __len__(self) -> int:
        return len(self._by_id)

    def __iter__(self):
        return iter(self._by_id.values())

    def get(self, model_id: str) -> ModelPricing:
        try:
            return self._by_id[model_id]
        except KeyError:
            raise UnknownModel(model_id) from None

    @classmethod
    def load(cls, path: str | Path | None = None) -> "PricingTable":
        """Bundled table by default; a config can point at an override file."""
        if path is None:
            raw = resources.files("opendataqa.assets").joinpath("pricing.json").read_text("utf-8")
        else:
            raw = Path(path).read_text("utf-8")
        doc = json.loads(raw)
        return cls(
            [
                ModelPricing(
                    model_id=m["model_id"],
                    name=m.get("name", m["model_id"]),
                    developer=m.get("developer", ""),
                    thinking=bool(m["thinking"]),
                    usd_per_m_input=float(m["usd_per_m_input"]),
                    usd_per_m_output=float(m["usd_per_m_output"]),
                    params=m.get("params"),
                )
                for m in doc["models"]
            ]
        )


def estimate_cost(usage: Usage, pricing: ModelPricing) -> float:
    """USD cost; reasoning tokens are billed at the output rate."""
    return (
        usage.input_tokens / 1e6 * pricing.usd_per_m_input
        + (usage.output_tokens + usage.reasoning_tokens) / 1e6 * pricing.usd_per_m_output
    )


# ---------------------------------------------------------------------------
# Tool-argument validation
# ---------------------------------------------------------------------------

def validate_tool_call(call: ToolCall, tools: Sequence[ToolSpec]) -> None:
    """Raise MalformedToolArguments if the call does not fit a declared tool."""
    from . import jsonschema_lite

    spec = next((t for t in tools if t.name == call.name), None)
    if spec is None:
        raise MalformedToolArguments(call.id, f"tool {call.name!r} was not declared")
    err = jsonschema_lite.check(call.arguments, spec.parameters)
    if err:
        raise MalformedToolArguments(call.id, err)


# ---------------------------------------------------------------------------
# Scripted provider
# ---------------------------------------------------------------------------

def _approx_tokens(text: str) -> int:
    return max(1, math.ceil(len(text) / 4)) if text else 0


class ScriptedProvider:
    """Replays canned assistant turns for deterministic offline runs.

    The script is either a plain list of turns or
    ``{"scenarios": [{"match": ..., "requires_tool": ..., "turns": [...]}]}``.
    A scenario is selected by substring match against the system and user
    messages (so tool results echoing unrelated ids cannot hijack the
    match) plus, optionally, the presence of a declared tool name.  Within
    a scenario the turn index equals the number of assistant messages
    already in the conversation, so replaying a prefix always yields the
    same answer.  Each turn may assert a predicate on the full incoming
    request (tool results included) via ``require_contains``.
    """

    provider_id = "scripted"

    def __init__(self, script: dict | list):
        if isinstance(script, list):
            script = {"scenarios": [{"turns": script}]}
        self.scenarios = script.get("scenarios", [])
        if not self.scenarios:
            raise ScriptError("script has no scenarios")

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedProvider":
        return cls(json.loads(Path(path).read_text("utf-8")))

    @staticmethod
    def _conversation_text(messages: Sequence[ChatMessage]) -> str:
        return "\n".join(m.text_content() for m in messages)

    @staticmethod
    def _instruction_text(messages: Sequence[ChatMessage]) -> str:
        return "\n".join(m.text_content() for m in messages if m.role in ("system", "user"))

    def _select(self, messages: Sequence[ChatMessage], tools: Sequence[ToolSpec]) -> dict:
        text = self._instruction_text(messages)
        declared = {t.name for t in tools}
        for scenario in self.scenarios:
            if scenario.get("match") and scenario["match"] not in text:
                continue
            if scenario.get("requires_tool") and scenario["requires_tool"] not in declared:
                continue
            return scenario
        raise ProviderUnavailable("no script scenario matches the request")

    def complete(
        self, messages: Sequence[ChatMessage], tools: Sequence[ToolSpec], model: str
    ) -> tuple[ChatMessage, Usage]:
        scenario = self._select(messages, tools)
        turn_index = sum(1 for m in messages if m.role == "assistant")
        turns = scenario.get("turns", [])
        if turn_index >= len(turns):
            raise ProviderUnavailable(
                f"script scenario {scenario.get('name', '?')!r} exhausted after {len(turns)} turns"
            )
        turn = turns[turn_index]

        if turn.get("error") == "rate_limited":
            raise RateLimited(float(turn.get("retry_after", 0.0)))
        if turn.get("error") == "unavailable":
            raise ProviderUnavailable("scripted failure")
        if turn.get("error") == "context_overflow":
            raise ContextOverflow()

        needle = turn.get("require_contains")
        if needle and needle not in self._conversation_text(messages):
            raise ScriptError(
                f"scenario {scenario.get('name', '?')!r} turn {turn_index}: "
                f"expected request to contain {needle!r}"
            )

        text = turn.get("text", "")
        calls = [
            ToolCall(
                id=c.get("id", f"call_{turn_index}_{i}"),
                name=c["name"],
                arguments=c.get("arguments", {}),
            )
            for i, c in enumerate(turn.get("tool_calls", []))
        ]
        reply = ChatMessage(role="assistant", parts=[TextPart(text)] if text else [],
                            tool_calls=calls)
        if "usage" in turn:
            u = turn["usage"]
            usage = Usage(
                int(u.get("input_tokens", 0)),
                int(u.get("output_tokens", 0)),
                int(u.get("reasoning_tokens", 0)),
            )
        else:
            out_chars = len(text) + sum(len(json.dumps(c.arguments)) for c in calls)
            usage = Usage(
                _approx_tokens(self._conversation_text(messages)),
                _approx_tokens("x" * out_chars),
                0,
            )
        return reply, usage


# ---------------------------------------------------------------------------
# HTTPS provider (standard chat-completions + tools shape)
# ---------------------------------------------------------------------------

class HttpChatProvider:
    """Client for an OpenAI-compatible chat completions endpoint."""

    def __init__(self, endpoint: str, api_key_env: str, timeout: float = 120.0):
        self.provider_id = f"http:{endpoint}"
        self.endpoint = endpoint
        self.api_key_env = api_key_env
        self.timeout = timeout

    @staticmethod
    def _encode_message(msg: ChatMessage) -> dict:
        if msg.role == "tool":
            return {
                "role": "tool",
                "tool_call_id": msg.tool_call_id,
                "content": msg.text_content(),
            }
        content: list[dict] | str
        blocks = []
        for part in msg.parts:
            if isinstance(part, TextPart):
                blocks.append({"type": "text", "text": part.text})
            elif isinstance(part, ImagePart):
                blocks.append(
                    {
                        "type": "image_url",
                        "image_url": {
                            "url": f"data:{part.media_type};base64,{part.base64_data}"
                        },
                    }
                )
            elif isinstance(part, DocumentPart):
                blocks.append({"type": "text", "text": part.markdown})
        content = blocks if any(b["type"] != "text" for b in blocks) else "\n".join(
            b["text"] for b in blocks
        )
        out: dict = {"role": msg.role, "content": content}
        if msg.tool_calls:
            out["tool_calls"] = [
                {
                    "id": c.id,
                    "type": "function",
                    "function": {"name": c.name, "arguments": json.dumps(c.arguments)},
                }
                for c in msg.tool_calls
            ]
        return out

    def complete(
        self, messages: Sequence[ChatMessage], tools: Sequence[ToolSpec], model: str
    ) -> tuple[ChatMessage, Usage]:
        import requests

        api_key = os.environ.get(self.api_key_env, "")
        if not api_key:
            raise ProviderUnavailable(f"environment variable {self.api_key_env} is not set")
        payload: dict = {
            "model": model,
            "messages": [self._encode_message(m) for m in messages],
        }
        if tools:
            payload["tools"] = [
                {
                    "type": "function",
                    "function": {
                        "name": t.name,
                        "description": t.description,
                        "parameters": t.parameters,
                    },
                }
                for t in tools
            ]
        try:
            resp = requests.post(
                self.endpoint,
                json=payload,
                headers={"Authorization": f"Bearer {api_key}"},
                timeout=self.timeout,
            )
        except requests.RequestException as exc:
            err = ProviderUnavailable(f"chat endpoint unreachable: {exc}")
            err.transient = True
            raise err from None
        if resp.status_code == 429:
            retry_after = float(resp.headers.get("Retry-After", "1"))
            raise RateLimited(retry_after)
        if resp.status_code == 400 and "context" in resp.text.lower():
            raise ContextOverflow(resp.text[:500])
        if resp.status_code >= 500:
            err = ProviderUnavailable(f"chat endpoint returned {resp.status_code}")
            err.transient = True
            raise err
        if resp.status_code != 200:
            raise ProviderUnavailable(
                f"chat endpoint returned {resp.status_code}: {resp.text[:500]}"
            )
        body = resp.json()
        choice = body["choices"][0]["message"]
        calls = [
            ToolCall(
                id=c.get("id", f"call_{i}"),
                name=c["function"]["name"],
                arguments=_parse_arguments(c["function"].get("arguments", "{}")),
            )
            for i, c in enumerate(choice.get("tool_calls") or [])
        ]
        text = choice.get("content") or ""
        usage_raw = body.get("usage", {})
        details = usage_raw.get("completion_tokens_details", {}) or {}
        usage = Usage(
            int(usage_raw.get("prompt_tokens", 0)),
            int(usage_raw.get("completion_tokens", 0)),
            int(details.get("reasoning_tokens", 0) or 0),
        )
        reply = ChatMessage(role="assistant", parts=[TextPart(text)] if text else [],
                            tool_calls=calls)
        return reply, usage


def _parse_arguments(raw) -> dict:
    if isinstance(raw, dict):
        return raw
    try:
        parsed = json.loads(raw or "{}")
    except json.JSONDecodeError:
        return {"__raw__": raw}
    return parsed if isinstance(parsed, dict) else {"__raw__": parsed}


# ---------------------------------------------------------------------------
# Gateway
# ---------------------------------------------------------------------------

class Gateway:
    """Adds retry, validation, accounting, and concurrency limits on top
    of a provider.  Shareable across threads."""

    def __init__(
        self,
        provider,
        pricing: PricingTable | None = None,
        max_retries: int = 3,
        backoff_base: float = 0.5,
        sleep: Callable[[float], None] = time.sleep,
        max_in_flight: int = 8,
    ):
        self.provider = provider
        self.pricing = pricing or PricingTable.load()
        self.max_retries = max_retries
        self.backoff_base = backoff_base
        self._sleep = sleep
        self._slots = threading.Semaphore(max_in_flight)

    def complete(
        self,
        messages: Sequence[ChatMessage],
        tools: Sequence[ToolSpec] = (),
        model: str = "gpt-4.1",
    ) -> tuple[ChatMessage, Usage]:
        """One model turn.  Tool calls are validated against the declared
        specs; invalid ones come back annotated (never retried) so the
        agent loop can surface the problem to the model as an observation.
        """
        if not messages:
            raise ValueError("messages must be non-empty")
        if messages[0].role not in ("system", "user"):
            raise ValueError("first message must be system or user")

        attempt = 0
        while True:
            try:
                with self._slots:
                    reply, usage = self.provider.complete(messages, tools, model)
                break
            except RateLimited as exc:
                attempt += 1
                if attempt > self.max_retries:
                    raise
                delay = max(exc.retry_after, self.backoff_base * 2 ** (attempt - 1))
                log.warning("rate limited, retry %d/%d in %.1fs", attempt, self.max_retries, delay)
                self._sleep(delay)
            except ProviderUnavailable as exc:
                if not getattr(exc, "transient", False):
                    raise
                attempt += 1
                if attempt > self.max_retries:
                    raise
                delay = self.backoff_base * 2 ** (attempt - 1)
                log.warning("transient provider error (%s), retry %d/%d", exc, attempt, self.max_retries)
                self._sleep(delay)

        for call in reply.tool_calls:
            try:
                validate_tool_call(call, tools)
            except MalformedToolArguments as exc:
                call.invalid_reason = exc.reason
        return reply, usage

    def cost(self, usage: Usage, model: str) -> float:
        return estimate_cost(usage, self.pricing.get(model))
