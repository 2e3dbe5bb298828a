"""Answer grading: LLM judge with a deterministic fallback.

The deterministic mode normalizes (lowercase, punctuation, units,
thousands separators) and compares numerically with a symmetric relative
tolerance of 1e-4, or textually by token equality / contiguous token
containment.  The LLM mode asks a judge model for a binary verdict
through a tool call; provider failure falls back to deterministic and
flags the record.
"""
from __future__ import annotations

import logging
import re
from importlib import resources

from ..errors import GatewayError
from ..gateway import ChatMessage, Gateway, ToolSpec

log = logging.getLogger(__name__)

RELATIVE_TOLERANCE = 1e-4

_NUMBER_RE = re.compile(r"-?\d(?:[\d,']*\d)?(?:\.\d+)?")

VERDICT_TOOL = ToolSpec(
    name="verdict",
    description="Deliver the binary grading verdict.",
    parameters={
        "type": "object",
        "properties": {
            "correct": {"type": "boolean"},
            "reasoning": {"type": "string"},
        },
        "required": ["correct"],
        "additionalProperties": False,
    },
)


def _canonical(text: str) -> str:
    """Strip thousands separators inside number literals."""
    return _NUMBER_RE.sub(lambda m: m.group(0).replace(",", "").replace("'", ""), text)


def _numbers(text: str) -> list[float]:
    out = []
    for raw in _NUMBER_RE.findall(_canonical(text)):
        try:
            out.append(float(raw))
        except ValueError:
            continue
    return out


def numbers_equal(a: float, b: float, tolerance: float = RELATIVE_TOLERANCE) -> bool:
    """Symmetric relative comparison; exact at zero."""
    if a == b:
        return True
    return abs(a - b) <= tolerance * max(abs(a), abs(b))


def _tokens(text: str) -> list[str]:
    raw = re.findall(r"[a-z0-9äöüéèàç.]+", _canonical(text).lower())
    return [t for t in (tok.strip(".") for tok in raw) if t]


def deterministic_judge(answer: str, reference: str) -> bool:
    """Normalization-based comparison; no model involved."""
    if not reference:
        raise ValueError("reference answer must be non-empty")
    ref_numbers = _numbers(reference)
    ref_tokens = _tokens(reference)
    # a purely numeric reference grades numerically against any answer number
    if len(ref_numbers) == 1 and ref_tokens and all(_NUMBER_RE.fullmatch(t) for t in ref_tokens):
        return any(numbers_equal(n, ref_numbers[0]) for n in _numbers(answer))
    answer_tokens = _tokens(answer)
    if ref_tokens == answer_tokens:
        return True
    # contiguous containment: "Nord" inside "the district Nord leads"
    n = len(ref_tokens)
    if n == 0:
        return False
    for i in range(len(answer_tokens) - n + 1):
        if answer_tokens[i : i + n] == ref_tokens:
            return True
    return False


def judge(
    answer: str,
    reference: str,
    mode: str = "deterministic",
    gateway: Gateway | None = None,
    model: str = "gpt-4o",
    question: str = "",
) -> tuple[bool, bool]:
    """Grade an answer; returns (correct, fell_back_to_deterministic)."""
    if mode == "deterministic":
        return deterministic_judge(answer, reference), False
    if mode != "llm":
        raise ValueError(f"unknown judge mode {mode!r}")
    if gateway is None:
        raise ValueError("llm judge mode needs a gateway")
    prompt = resources.files("opendataqa.assets.prompts").joinpath("judge_system.txt").read_text("utf-8")
    body = (
        f"Question: {question or '(not provided)'}\n"
        f"Reference answer: {reference}\n"
        f"Candidate answer: {answer}"
    )
    try:
        reply, _usage = gateway.complete(
            [ChatMessage.text("system", prompt), ChatMessage.text("user", body)],
            [VERDICT_TOOL],
            model,
        )
    except GatewayError as exc:
        log.warning("judge provider failure (%s); deterministic fallback", exc)
        return deterministic_judge(answer, reference), True
    call = next(
        (c for c in reply.tool_calls if c.name == "verdict" and c.invalid_reason is None), None
    )
    if call is None:
        log.warning("judge gave no usable verdict; deterministic fallback")
        return deterministic_judge(answer, reference), True
    return bool(call.arguments["correct"]), False
