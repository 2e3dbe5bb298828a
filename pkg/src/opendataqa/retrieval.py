"""Agentic dataset retrieval.

The model decomposes the question into focused subqueries (bounded by
config), searches the embedding index through a tool, and reports the
selected dataset ids through a second tool.  Reporting an empty list is
the rejection path: the conversation ends there instead of hallucinating
an answer.  Every step lands in an auditable trace.
"""
from __future__ import annotations

import base64
import hashlib
import json
import time
from dataclasses import dataclass, field
from importlib import resources

from . import embedding
from .catalog import Catalog, embedding_text
from .errors import EmptyIndex
from .gateway import (
    ChatMessage,
    DocumentPart,
    Gateway,
    ImagePart,
    TextPart,
    ToolSpec,
    Usage,
)
from .pdfmd import convert_pdf

NO_REPORT_REASON = "agent_no_report"


@dataclass
class RetrievalConfig:
    model: str = "gpt-4.1"
    max_subqueries: int = 3
    top_k: int = 10
    snippet_max_chars: int = 2000
    max_tool_rounds: int = 8
    language: str | None = None  # None -> catalog majority language


@dataclass
class UserQuestion:
    text: str
    image_b64: str | None = None
    image_media_type: str = "image/png"
    pdf_markdown: str | None = None

    @classmethod
    def build(
        cls,
        text: str,
        image_bytes: bytes | None = None,
        image_media_type: str = "image/png",
        pdf_bytes: bytes | None = None,
    ) -> "UserQuestion":
        """Convert raw attachments: image to base64, PDF to Markdown."""
        return cls(
            text=text,
            image_b64=base64.b64encode(image_bytes).decode("ascii") if image_bytes else None,
            image_media_type=image_media_type,
            pdf_markdown=convert_pdf(pdf_bytes) if pdf_bytes else None,
        )

    def to_message(self) -> ChatMessage:
        parts: list = [TextPart(self.text)]
        if self.image_b64:
            parts.append(ImagePart(self.image_b64, self.image_media_type))
        if self.pdf_markdown:
            parts.append(DocumentPart(self.pdf_markdown))
        return ChatMessage(role="user", parts=parts)


@dataclass
class RetrievalTrace:
    prompt_hash: str = ""
    events: list[dict] = field(default_factory=list)

    def add(self, kind: str, **payload) -> None:
        self.events.append({"type": kind, **payload})

    def warnings(self) -> list[str]:
        return [e["message"] for e in self.events if e["type"] == "warning"]

    def to_jsonl(self) -> str:
        head = {"type": "trace_header", "version": 1, "prompt_hash": self.prompt_hash}
        lines = [json.dumps(head, ensure_ascii=False)]
        lines += [json.dumps(e, ensure_ascii=False) for e in self.events]
        return "\n".join(lines) + "\n"


@dataclass
class RetrievalOutcome:
    dataset_ids: list[str]
    rejected: bool
    reformulations: list[str]
    trace: RetrievalTrace
    usage: Usage
    latency_s: float

    def __post_init__(self):
        assert self.rejected == (len(self.dataset_ids) == 0)


def load_prompt(name: str) -> str:
    return resources.files("opendataqa.assets.prompts").joinpath(f"{name}.txt").read_text("utf-8")


def _tool_specs(config: RetrievalConfig) -> list[ToolSpec]:
    return [
        ToolSpec(
            name="search_datasets",
            description=(
                "Semantic nearest-neighbor search over dataset metadata. "
                "Returns the closest datasets with id, similarity score, and a snippet."
            ),
            parameters={
                "type": "object",
                "properties": {
                    "query": {"type": "string"},
                    "top_k": {"type": "integer", "minimum": 1},
                },
                "required": ["query"],
                "additionalProperties": False,
            },
        ),
        ToolSpec(
            name="report_results",
            description=(
                "Report the final selection of dataset ids able to answer the "
                "question. Report an empty list when no dataset fits."
            ),
            parameters={
                "type": "object",
                "properties": {
                    "dataset_ids": {"type": "array", "items": {"type": "string"}},
                    "justification": {"type": "string"},
                },
                "required": ["dataset_ids"],
                "additionalProperties": False,
            },
        ),
    ]


def metadata_snippet(catalog: Catalog, dataset_id: str, max_chars: int) -> str:
    meta = catalog.get(dataset_id)
    fields = ", ".join(f.name for f in meta.fields)
    snippet = f"{meta.title} — {meta.summary} [fields: {fields}]"
    if len(snippet) > max_chars:
        snippet = snippet[: max_chars - 1] + "…"
    return snippet


def search_datasets(
    catalog: Catalog,
    index: embedding.Index,
    embedder: embedding.Embedder,
    query: str,
    top_k: int,
    snippet_max_chars: int = 2000,
) -> list[tuple[embedding.SearchHit, str]]:
    """One nearest-neighbor search with model-facing snippets."""
    vector = embedding.embed(embedder, query)
    hits = index.knn(vector, top_k)
    return [(h, metadata_snippet(catalog, h.dataset_id, snippet_max_chars)) for h in hits]


def _format_hits(hits: list[tuple[embedding.SearchHit, str]]) -> str:
    if not hits:
        return "No datasets found."
    lines = [
        f"{i + 1}. id={hit.dataset_id} score={hit.score:.4f}\n   {snippet}"
        for i, (hit, snippet) in enumerate(hits)
    ]
    return "\n".join(lines)


def retrieve(
    question: UserQuestion,
    catalog: Catalog,
    index: embedding.Index,
    embedder: embedding.Embedder,
    gateway: Gateway,
    config: RetrievalConfig | None = None,
    on_event=None,
) -> RetrievalOutcome:
    """Run the retrieval loop until the model reports or budgets run out.

    Invalid reported ids are dropped with a trace warning; hallucinated
    ids never escape.  If the model never reports within
    config.max_tool_rounds, the outcome is a forced rejection.
    """
    config = config or RetrievalConfig()
    if not question.text or not question.text.strip():
        raise ValueError("question text must be non-empty")
    emit = on_event or (lambda kind, payload: None)
    language = config.language or catalog.language
    prompt = load_prompt("retrieval_system").format(
        max_subqueries=config.max_subqueries, language=language
    )
    trace = RetrievalTrace(prompt_hash=hashlib.sha256(prompt.encode("utf-8")).hexdigest())
    tools = _tool_specs(config)
    messages: list[ChatMessage] = [ChatMessage.text("system", prompt), question.to_message()]

    usage_total = Usage()
    reformulations: list[str] = []
    reported: list[str] | None = None
    started = time.monotonic()

    for _round in range(config.max_tool_rounds):
        reply, usage = gateway.complete(messages, tools, config.model)
        usage_total = usage_total + usage
        messages.append(reply)

        if not reply.tool_calls:
            messages.append(
                ChatMessage.text(
                    "user",
                    "Use the search_datasets and report_results tools; do not answer in prose.",
                )
            )
            trace.add("warning", message="model turn without tool calls")
            continue

        for call in reply.tool_calls:
            if reported is not None:
                trace.add("warning", message=f"tool call {call.name} after report ignored")
                messages.append(
                    ChatMessage.text("tool", "The result set was already reported.", tool_call_id=call.id)
                )
                continue
            if call.invalid_reason is not None:
                trace.add("warning", message=f"malformed tool arguments: {call.invalid_reason}")
                messages.append(
                    ChatMessage.text(
                        "tool", f"Error: malformed arguments ({call.invalid_reason}).", tool_call_id=call.id
                    )
                )
                continue
            if call.name == "search_datasets":
                query = call.arguments["query"]
                top_k = int(call.arguments.get("top_k", config.top_k))
                if len(reformulations) >= config.max_subqueries:
                    trace.add("warning", message="subquery budget exhausted; search refused")
                    messages.append(
                        ChatMessage.text(
                            "tool",
                            f"Refused: the budget of {config.max_subqueries} subqueries is "
                            "exhausted. Call report_results now.",
                            tool_call_id=call.id,
                        )
                    )
                    continue
                if top_k < 1:
                    messages.append(
                        ChatMessage.text("tool", "Error: top_k must be >= 1.", tool_call_id=call.id)
                    )
                    continue
                reformulations.append(query)
                trace.add("subquery_issued", text=query)
                emit("reformulation", {"text": query})
                try:
                    hits = search_datasets(
                        catalog, index, embedder, query, top_k, config.snippet_max_chars
                    )
                except EmptyIndex:
                    messages.append(
                        ChatMessage.text("tool", "Error: the index is empty.", tool_call_id=call.id)
                    )
                    trace.add("hits_returned", hits=[])
                    continue
                trace.add(
                    "hits_returned",
                    hits=[{"dataset_id": h.dataset_id, "score": round(h.score, 6)} for h, _ in hits],
                )
                messages.append(ChatMessage.text("tool", _format_hits(hits), tool_call_id=call.id))
            elif call.name == "report_results":
                raw_ids = call.arguments.get("dataset_ids", [])
                valid: list[str] = []
                for dataset_id in raw_ids:
                    if dataset_id in catalog:
                        if dataset_id not in valid:
                            valid.append(dataset_id)
                    else:
                        trace.add(
                            "warning",
                            message=f"reported id {dataset_id!r} not in catalog; dropped",
                        )
                reported = valid
                trace.add(
                    "reported",
                    dataset_ids=valid,
                    rejected=len(valid) == 0,
                    justification=call.arguments.get("justification", ""),
                )
                messages.append(
                    ChatMessage.text("tool", "Selection recorded.", tool_call_id=call.id)
                )
            else:
                messages.append(
                    ChatMessage.text("tool", f"Error: unknown tool {call.name}.", tool_call_id=call.id)
                )
        if reported is not None:
            break

    if reported is None:
        trace.add("warning", message="model never reported; forcing rejection")
        trace.add("reported", dataset_ids=[], rejected=True, justification=NO_REPORT_REASON)
        reported = []

    return RetrievalOutcome(
        dataset_ids=reported,
        rejected=len(reported) == 0,
        reformulations=reformulations,
        trace=trace,
        usage=usage_total,
        latency_s=time.monotonic() - started,
    )


def dedupe_hits(hit_lists: list[list[embedding.SearchHit]]) -> list[embedding.SearchHit]:
    """Aggregate hits across subqueries: per dataset keep the max score,
    order by (-score, id)."""
    best: dict[str, float] = {}
    for hits in hit_lists:
        for hit in hits:
            if hit.dataset_id not in best or hit.score > best[hit.dataset_id]:
                best[hit.dataset_id] = hit.score
    return [
        embedding.SearchHit(dataset_id, score)
        for dataset_id, score in sorted(best.items(), key=lambda kv: (-kv[1], kv[0]))
    ]


def build_index_for_catalog(catalog: Catalog, embedder: embedding.Embedder) -> embedding.Index:
    return embedding.build_index({m.id: embedding_text(m) for m in catalog}, embedder)
