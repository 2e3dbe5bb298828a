"""Conversation lifecycle: retrieval -> rejection or analysis on the first
turn, LLM-routed follow-ups, one sandbox session per conversation, and a
unified audit event log.

A rejected first turn never creates a session and never spends analysis
tokens; that is the hallucination brake of the whole system.
"""
from __future__ import annotations

import logging
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from . import embedding
from .analysis import AnalysisConfig, FinalAnswer, analyze
from .catalog import Catalog, load_payload
from .errors import CatalogError, GatewayError
from .events import EventLog
from .gateway import ChatMessage, Gateway, ToolSpec
from .interpreter import Session
from .retrieval import RetrievalConfig, RetrievalOutcome, UserQuestion, load_prompt, retrieve

log = logging.getLogger(__name__)

REJECTION_TEXT = (
    "No datasets in the catalog can answer this question, so I am stopping "
    "here instead of guessing. Try rephrasing, or ask about another topic."
)

ROUTE_TOOL = ToolSpec(
    name="route",
    description="Route the follow-up question to the next stage.",
    parameters={
        "type": "object",
        "properties": {
            "target": {"type": "string", "enum": ["retrieval", "analysis"]},
            "rationale": {"type": "string"},
        },
        "required": ["target"],
        "additionalProperties": False,
    },
)


@dataclass
class RouteDecision:
    target: str  # retrieval | analysis
    rationale: str


@dataclass
class SystemResponse:
    kind: str  # answer | rejection | error
    text: str
    dataset_ids: list[str] = field(default_factory=list)
    final: FinalAnswer | None = None
    retrieval: RetrievalOutcome | None = None


@dataclass
class Conversation:
    id: str
    events: EventLog
    turns: list[tuple[UserQuestion, SystemResponse]] = field(default_factory=list)
    active_datasets: list[str] = field(default_factory=list)
    session: Session | None = None

    @property
    def turn_number(self) -> int:
        return len(self.turns) + 1


class Orchestrator:
    def __init__(
        self,
        catalog: Catalog,
        index: embedding.Index,
        embedder: embedding.Embedder,
        gateway: Gateway,
        retrieval_config: RetrievalConfig | None = None,
        analysis_config: AnalysisConfig | None = None,
        data_dir: str | Path | None = None,
        router_model: str | None = None,
    ):
        self.catalog = catalog
        self.index = index
        self.embedder = embedder
        self.gateway = gateway
        self.retrieval_config = retrieval_config or RetrievalConfig()
        self.analysis_config = analysis_config or AnalysisConfig()
        self.data_dir = Path(data_dir) if data_dir else None
        self.router_model = router_model or self.retrieval_config.model

    # -- lifecycle -----------------------------------------------------------

    def new_conversation(self, conversation_id: str | None = None) -> Conversation:
        conversation_id = conversation_id or uuid.uuid4().hex
        path = (
            self.data_dir / "conversations" / conversation_id / "audit.jsonl"
            if self.data_dir
            else None
        )
        return Conversation(id=conversation_id, events=EventLog(conversation_id, path))

    def handle_turn(self, conversation: Conversation, question: UserQuestion) -> SystemResponse:
        if not conversation.turns:
            response = self.handle_first_turn(conversation, question)
        else:
            response = self.handle_followup(conversation, question)
        conversation.turns.append((question, response))
        return response

    # -- first turn -----------------------------------------------------------

    def handle_first_turn(self, conversation: Conversation, question: UserQuestion) -> SystemResponse:
        assert not conversation.turns, "handle_first_turn needs a fresh conversation"
        turn = conversation.turn_number
        emit = lambda kind, payload: conversation.events.append(kind, payload, turn)

        outcome = retrieve(
            question,
            self.catalog,
            self.index,
            self.embedder,
            self.gateway,
            self.retrieval_config,
            on_event=emit,
        )
        if outcome.rejected:
            emit(
                "rejection",
                {
                    "message": REJECTION_TEXT,
                    "reformulations": outcome.reformulations,
                    "usage": outcome.usage.to_json(),
                },
            )
            return SystemResponse(kind="rejection", text=REJECTION_TEXT, retrieval=outcome)

        emit(
            "datasets_selected",
            {
                "dataset_ids": outcome.dataset_ids,
                "titles": {d: self.catalog.get(d).title for d in outcome.dataset_ids},
            },
        )
        try:
            datasets = self._load_payloads(outcome.dataset_ids)
        except CatalogError as exc:
            message = "A selected dataset could not be loaded; please try again later."
            emit("error", {"message": message, "detail": str(exc)})
            return SystemResponse(kind="error", text=message, retrieval=outcome)

        conversation.session = Session()
        conversation.active_datasets = list(outcome.dataset_ids)
        return self._run_analysis(conversation, question, datasets, outcome)

    # -- follow-ups ---------------------------------------------------------------

    def route_followup(self, conversation: Conversation, question: UserQuestion) -> RouteDecision:
        assert conversation.turns, "route_followup needs at least one prior turn"
        actives = {
            d: self.catalog.get(d).title for d in conversation.active_datasets
        }
        prompt = load_prompt("router_system").format(
            active_datasets=", ".join(f"{k} ({v})" for k, v in actives.items()) or "none"
        )
        messages = [ChatMessage.text("system", prompt), question.to_message()]
        try:
            reply, _usage = self.gateway.complete(messages, [ROUTE_TOOL], self.router_model)
        except GatewayError as exc:
            target = "analysis" if conversation.active_datasets else "retrieval"
            log.warning("router provider failure (%s); falling back to %s", exc, target)
            return RouteDecision(target=target, rationale=f"fallback: provider failure ({exc})")
        call = next(
            (c for c in reply.tool_calls if c.name == "route" and c.invalid_reason is None),
            None,
        )
        if call is None:
            target = "analysis" if conversation.active_datasets else "retrieval"
            return RouteDecision(target=target, rationale="fallback: router gave no usable call")
        target = call.arguments["target"]
        if target == "analysis" and not conversation.active_datasets:
            return RouteDecision(
                target="retrieval", rationale="override: no active datasets to analyze"
            )
        return RouteDecision(target=target, rationale=call.arguments.get("rationale", ""))

    def handle_followup(self, conversation: Conversation, question: UserQuestion) -> SystemResponse:
        turn = conversation.turn_number
        emit = lambda kind, payload: conversation.events.append(kind, payload, turn)
        decision = self.route_followup(conversation, question)

        outcome = None
        if decision.target == "retrieval":
            outcome = retrieve(
                question,
                self.catalog,
                self.index,
                self.embedder,
                self.gateway,
                self.retrieval_config,
                on_event=emit,
            )
            new_ids = [d for d in outcome.dataset_ids if d not in conversation.active_datasets]
            if outcome.rejected and not conversation.active_datasets:
                emit("rejection", {"message": REJECTION_TEXT, "reformulations": outcome.reformulations})
                return SystemResponse(kind="rejection", text=REJECTION_TEXT, retrieval=outcome)
            if outcome.rejected:
                emit(
                    "rejection",
                    {
                        "message": REJECTION_TEXT,
                        "reformulations": outcome.reformulations,
                        "note": "previously selected datasets stay active",
                    },
                )
                return SystemResponse(kind="rejection", text=REJECTION_TEXT, retrieval=outcome)
            conversation.active_datasets.extend(new_ids)
            emit(
                "datasets_selected",
                {
                    "dataset_ids": list(conversation.active_datasets),
                    "new_ids": new_ids,
                    "titles": {d: self.catalog.get(d).title for d in conversation.active_datasets},
                },
            )

        try:
            datasets = self._load_payloads(conversation.active_datasets)
        except CatalogError as exc:
            message = "A selected dataset could not be loaded; please try again later."
            emit("error", {"message": message, "detail": str(exc)})
            return SystemResponse(kind="error", text=message, retrieval=outcome)

        if conversation.session is None:
            conversation.session = Session()
        return self._run_analysis(conversation, question, datasets, outcome)

    # -- shared ------------------------------------------------------------------

    def _load_payloads(self, dataset_ids: list[str]) -> list[tuple]:
        return [
            (self.catalog.get(dataset_id), load_payload(self.catalog, dataset_id))
            for dataset_id in dataset_ids
        ]

    def _run_analysis(
        self,
        conversation: Conversation,
        question: UserQuestion,
        datasets: list[tuple],
        outcome: RetrievalOutcome | None,
    ) -> SystemResponse:
        turn = len(conversation.turns) + 1
        emit = lambda kind, payload: conversation.events.append(kind, payload, turn)
        final = analyze(
            question,
            datasets,
            self.gateway,
            conversation.session,
            self.analysis_config,
            on_event=emit,
        )
        for artifact in final.artifacts:
            emit("artifact", artifact.to_json())
        emit(
            "final",
            {
                "text": final.text,
                "terminated_by": final.terminated_by,
                "steps": len(final.steps),
                "usage": final.usage.to_json(),
                "dataset_ids": list(conversation.active_datasets),
            },
        )
        return SystemResponse(
            kind="answer",
            text=final.text,
            dataset_ids=list(conversation.active_datasets),
            final=final,
            retrieval=outcome,
        )
