"""HTTP facade and streaming layer.

REST endpoints create conversations and accept questions (JSON or
multipart with optional image/PDF attachments); intermediate reasoning
events stream over server-sent events, and the audit trace is served as
JSONL.  Turn processing is asynchronous; one turn per conversation at a
time (409 otherwise).  Built on the standard library HTTP server so the
whole stack stays dependency-light and testable offline.
"""
from __future__ import annotations

import json
import logging
import re
import threading
from dataclasses import dataclass
from email.parser import BytesParser
from email.policy import default as _email_policy
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .errors import UnreadablePdf
from .orchestrator import Conversation, Orchestrator
from .retrieval import UserQuestion

log = logging.getLogger(__name__)


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 0  # 0 -> ephemeral
    max_conversations: int = 10_000
    max_attachment_bytes: int = 10 * 1024 * 1024
    shutdown_grace_s: float = 10.0
    stream_poll_s: float = 0.2


class ConversationState:
    def __init__(self, conversation: Conversation):
        self.conversation = conversation
        self.lock = threading.Lock()
        self.turn_in_flight = False
        self.worker: threading.Thread | None = None


class App:
    """Shared state behind the HTTP handler."""

    def __init__(self, orchestrator: Orchestrator, config: ServiceConfig):
        self.orchestrator = orchestrator
        self.config = config
        self.conversations: dict[str, ConversationState] = {}
        self.lock = threading.Lock()

    # -- conversation management ------------------------------------------------

    def create_conversation(self) -> str | None:
        with self.lock:
            if len(self.conversations) >= self.config.max_conversations:
                return None
            conversation = self.orchestrator.new_conversation()
            self.conversations[conversation.id] = ConversationState(conversation)
            return conversation.id

    def get(self, conversation_id: str) -> ConversationState | None:
        with self.lock:
            return self.conversations.get(conversation_id)

    def submit_question(self, state: ConversationState, question: UserQuestion) -> int:
        """Start asynchronous turn processing; returns the turn number."""
        turn = state.conversation.turn_number

        def work():
            try:
                self.orchestrator.handle_turn(state.conversation, question)
            except Exception as exc:  # terminal error event, never a crash
                log.exception("turn failed for %s", state.conversation.id)
                state.conversation.events.append(
                    "error", {"message": f"internal error: {exc}"}, turn
                )
            finally:
                with state.lock:
                    state.turn_in_flight = False

        worker = threading.Thread(target=work, name=f"turn-{state.conversation.id}", daemon=True)
        state.worker = worker
        worker.start()
        return turn

    def shutdown(self) -> None:
        """Wait for in-flight turns; emit error terminals for stragglers."""
        deadline = self.config.shutdown_grace_s
        with self.lock:
            states = list(self.conversations.values())
        for state in states:
            worker = state.worker
            if worker and worker.is_alive():
                worker.join(timeout=deadline)
                if worker.is_alive():
                    state.conversation.events.append(
                        "error",
                        {"message": "server shutting down before the turn finished"},
                        state.conversation.turn_number,
                    )


_ROUTES = [
    ("POST", re.compile(r"^/conversations$"), "create_conversation"),
    ("POST", re.compile(r"^/conversations/([^/]+)/questions$"), "post_question"),
    ("GET", re.compile(r"^/conversations/([^/]+)/events$"), "stream_events"),
    ("GET", re.compile(r"^/conversations/([^/]+)/trace$"), "get_trace"),
    ("GET", re.compile(r"^/datasets/([^/]+)$"), "get_dataset"),
]


class Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    app: App  # set by make_handler

    def log_message(self, fmt, *args):  # route through logging, not stderr
        log.debug("http: " + fmt, *args)

    # -- plumbing --------------------------------------------------------------

    def _send_json(self, status: int, payload: dict) -> None:
        body = json.dumps(payload, ensure_ascii=False).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _dispatch(self, method: str) -> None:
        path = self.path.split("?", 1)[0]
        for verb, pattern, name in _ROUTES:
            if verb != method:
                continue
            match = pattern.match(path)
            if match:
                getattr(self, name)(*match.groups())
                return
        self._send_json(404, {"error": "not found"})

    def do_POST(self):
        self._dispatch("POST")

    def do_GET(self):
        self._dispatch("GET")

    def _query_params(self) -> dict:
        if "?" not in self.path:
            return {}
        out = {}
        for pair in self.path.split("?", 1)[1].split("&"):
            if "=" in pair:
                key, value = pair.split("=", 1)
                out[key] = value
        return out

    # -- endpoints ---------------------------------------------------------------

    def create_conversation(self):
        conversation_id = self.app.create_conversation()
        if conversation_id is None:
            self._send_json(503, {"error": "conversation capacity exceeded"})
            return
        self._send_json(201, {"conversation_id": conversation_id})

    def _read_question(self) -> UserQuestion:
        length = int(self.headers.get("Content-Length", "0"))
        content_type = self.headers.get("Content-Type", "")
        body = self.rfile.read(length) if length else b""
        if content_type.startswith("multipart/form-data"):
            header = f"Content-Type: {content_type}\r\n\r\n".encode("ascii")
            msg = BytesParser(policy=_email_policy).parsebytes(header + body)
            text = ""
            image_bytes = pdf_bytes = None
            image_media_type = "image/png"
            for part in msg.iter_parts():
                name = part.get_param("name", header="content-disposition")
                payload = part.get_payload(decode=True) or b""
                if name == "text":
                    text = payload.decode("utf-8")
                elif name == "image":
                    image_bytes = payload
                    image_media_type = part.get_content_type()
                elif name == "pdf":
                    pdf_bytes = payload
            return UserQuestion.build(
                text, image_bytes=image_bytes, image_media_type=image_media_type, pdf_bytes=pdf_bytes
            )
        doc = json.loads(body.decode("utf-8") or "{}")
        import base64

        return UserQuestion.build(
            doc.get("text", ""),
            image_bytes=base64.b64decode(doc["image_b64"]) if doc.get("image_b64") else None,
            image_media_type=doc.get("image_media_type", "image/png"),
            pdf_bytes=base64.b64decode(doc["pdf_b64"]) if doc.get("pdf_b64") else None,
        )

    def post_question(self, conversation_id: str):
        state = self.app.get(conversation_id)
        if state is None:
            self._send_json(404, {"error": "unknown conversation"})
            return
        length = int(self.headers.get("Content-Length", "0"))
        if length > self.app.config.max_attachment_bytes:
            remaining = length  # drain so the client can read the response
            while remaining > 0:
                chunk = self.rfile.read(min(remaining, 1 << 20))
                if not chunk:
                    break
                remaining -= len(chunk)
            self._send_json(413, {"error": "attachment too large"})
            return
        with state.lock:
            if state.turn_in_flight:
                self._send_json(409, {"error": "a turn is already in flight"})
                return
            state.turn_in_flight = True
        try:
            question = self._read_question()
            if not question.text.strip():
                raise ValueError("question text is required")
        except (ValueError, KeyError, UnreadablePdf, UnicodeDecodeError) as exc:
            with state.lock:
                state.turn_in_flight = False
            self._send_json(400, {"error": str(exc)})
            return
        turn = self.app.submit_question(state, question)
        self._send_json(202, {"turn": turn, "conversation_id": conversation_id})

    def stream_events(self, conversation_id: str):
        state = self.app.get(conversation_id)
        if state is None:
            self._send_json(404, {"error": "unknown conversation"})
            return
        params = self._query_params()
        after = int(self.headers.get("Last-Event-ID") or params.get("after") or 0)

        self.send_response(200)
        self.send_header("Content-Type", "text/event-stream; charset=utf-8")
        self.send_header("Cache-Control", "no-cache")
        self.send_header("Connection", "close")
        self.end_headers()

        events_log = state.conversation.events
        poll = self.app.config.stream_poll_s
        try:
            while True:
                fresh = events_log.wait_for_events(after, timeout=poll)
                for envelope in fresh:
                    frame = (
                        f"id: {envelope.seq}\n"
                        f"event: {envelope.type}\n"
                        f"data: {envelope.to_json_line()}\n\n"
                    )
                    self.wfile.write(frame.encode("utf-8"))
                    after = envelope.seq
                self.wfile.flush()
                with state.lock:
                    in_flight = state.turn_in_flight
                if not fresh and not in_flight:
                    break
        except (BrokenPipeError, ConnectionResetError):
            pass

    def get_trace(self, conversation_id: str):
        state = self.app.get(conversation_id)
        if state is None:
            self._send_json(404, {"error": "unknown conversation"})
            return
        body = state.conversation.events.to_jsonl().encode("utf-8")
        self.send_response(200)
        self.send_header("Content-Type", "application/x-ndjson; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def get_dataset(self, dataset_id: str):
        catalog = self.app.orchestrator.catalog
        if dataset_id not in catalog:
            self._send_json(404, {"error": "unknown dataset"})
            return
        from .catalog import metadata_to_json

        self._send_json(200, metadata_to_json(catalog.get(dataset_id)))


def make_handler(app: App):
    return type("BoundHandler", (Handler,), {"app": app})


class Service:
    """Owns the HTTP server lifecycle."""

    def __init__(self, orchestrator: Orchestrator, config: ServiceConfig | None = None):
        self.config = config or ServiceConfig()
        self.app = App(orchestrator, self.config)
        self.server = ThreadingHTTPServer(
            (self.config.host, self.config.port), make_handler(self.app)
        )
        self.server.daemon_threads = True
        self._thread: threading.Thread | None = None

    @property
    def port(self) -> int:
        return self.server.server_address[1]

    def start(self) -> None:
        self._thread = threading.Thread(target=self.server.serve_forever, daemon=True)
        self._thread.start()
        log.info("service listening on %s:%s", self.config.host, self.port)

    def stop(self) -> None:
        self.app.shutdown()
        self.server.shutdown()
        self.server.server_close()
        if self._thread:
            self._thread.join(timeout=5)
