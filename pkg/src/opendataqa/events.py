"""Audit event log: the single source of truth for what a conversation did.

Events are append-only with a per-conversation monotone sequence number
and non-decreasing timestamps.  The same EventEnvelope objects feed the
live SSE stream and the persisted JSONL trace, which is what makes replay
byte-identical to the live delivery.
"""
from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass
from pathlib import Path

EVENT_TYPES = (
    "reformulation",
    "datasets_selected",
    "rejection",
    "step_started",
    "step_result",
    "artifact",
    "final",
    "error",
)
TERMINAL_TYPES = frozenset({"rejection", "final", "error"})
SCHEMA_VERSION = 1


@dataclass(frozen=True)
class EventEnvelope:
    conversation_id: str
    seq: int
    turn: int
    type: str
    ts: float
    payload: dict

    def to_json(self) -> dict:
        return {
            "v": SCHEMA_VERSION,
            "conversation_id": self.conversation_id,
            "seq": self.seq,
            "turn": self.turn,
            "type": self.type,
            "ts": self.ts,
            "payload": self.payload,
        }

    def to_json_line(self) -> str:
        return json.dumps(self.to_json(), ensure_ascii=False)

    @classmethod
    def from_json(cls, doc: dict) -> "EventEnvelope":
        return cls(
            conversation_id=doc["conversation_id"],
            seq=doc["seq"],
            turn=doc["turn"],
            type=doc["type"],
            ts=doc["ts"],
            payload=doc["payload"],
        )


class EventLog:
    """Thread-safe append-only event store with optional JSONL persistence
    and a condition variable for live tailing."""

    def __init__(self, conversation_id: str, path: str | Path | None = None):
        self.conversation_id = conversation_id
        self.path = Path(path) if path else None
        self._events: list[EventEnvelope] = []
        self._lock = threading.Lock()
        self._new_event = threading.Condition(self._lock)
        self._last_ts = 0.0
        if self.path:
            self.path.parent.mkdir(parents=True, exist_ok=True)

    def append(self, event_type: str, payload: dict, turn: int) -> EventEnvelope:
        if event_type not in EVENT_TYPES:
            raise ValueError(f"unknown event type {event_type!r}")
        with self._new_event:
            ts = max(time.time(), self._last_ts)
            self._last_ts = ts
            envelope = EventEnvelope(
                conversation_id=self.conversation_id,
                seq=len(self._events) + 1,
                turn=turn,
                type=event_type,
                ts=ts,
                payload=payload,
            )
            self._events.append(envelope)
            if self.path:
                with self.path.open("a", encoding="utf-8") as fh:
                    fh.write(envelope.to_json_line() + "\n")
            self._new_event.notify_all()
        return envelope

    def events(self, after_seq: int = 0) -> list[EventEnvelope]:
        with self._lock:
            return [e for e in self._events if e.seq > after_seq]

    def wait_for_events(self, after_seq: int, timeout: float = 1.0) -> list[EventEnvelope]:
        """Events after `after_seq`, blocking up to timeout for new ones."""
        with self._new_event:
            fresh = [e for e in self._events if e.seq > after_seq]
            if fresh:
                return fresh
            self._new_event.wait(timeout)
            return [e for e in self._events if e.seq > after_seq]

    def to_jsonl(self) -> str:
        with self._lock:
            return "".join(e.to_json_line() + "\n" for e in self._events)

    @staticmethod
    def replay_jsonl(text: str) -> list[EventEnvelope]:
        return [EventEnvelope.from_json(json.loads(line)) for line in text.splitlines() if line.strip()]
