from __future__ import annotations

import http.client
import json
import time

import pytest

from opendataqa.embedding import HashedNgramEmbedder
from opendataqa.orchestrator import Orchestrator
from opendataqa.retrieval import RetrievalConfig, build_index_for_catalog
from opendataqa.service import Service, ServiceConfig

from .conftest import scripted_gateway
from .test_orchestrator import FULL_SCRIPT, build_catalog


@pytest.fixture()
def service(tmp_path):
    catalog = build_catalog(tmp_path / "cat")
    embedder = HashedNgramEmbedder()
    orch = Orchestrator(
        catalog,
        build_index_for_catalog(catalog, embedder),
        embedder,
        scripted_gateway(FULL_SCRIPT),
        retrieval_config=RetrievalConfig(max_tool_rounds=4),
        data_dir=tmp_path / "data",
    )
    svc = Service(orch, ServiceConfig(max_conversations=3, stream_poll_s=0.05))
    svc.start()
    yield svc
    svc.stop()


def request(service, method, path, body=None, headers=None):
    conn = http.client.HTTPConnection("127.0.0.1", service.port, timeout=10)
    payload = json.dumps(body).encode() if isinstance(body, dict) else body
    base_headers = {"Content-Type": "application/json"} if isinstance(body, dict) else {}
    conn.request(method, path, body=payload, headers={**base_headers, **(headers or {})})
    resp = conn.getresponse()
    raw = resp.read()
    conn.close()
    try:
        return resp.status, json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError):
        return resp.status, raw


def create_conversation(service) -> str:
    status, body = request(service, "POST", "/conversations")
    assert status == 201
    return body["conversation_id"]


def ask_and_wait(service, conv_id, text, timeout=10.0):
    status, body = request(service, "POST", f"/conversations/{conv_id}/questions", {"text": text})
    assert status == 202, body
    deadline = time.time() + timeout
    while time.time() < deadline:
        state = service.app.get(conv_id)
        with state.lock:
            if not state.turn_in_flight:
                return
        time.sleep(0.02)
    raise TimeoutError("turn did not finish")


def read_sse(service, conv_id, after=0):
    conn = http.client.HTTPConnection("127.0.0.1", service.port, timeout=10)
    headers = {"Last-Event-ID": str(after)} if after else {}
    conn.request("GET", f"/conversations/{conv_id}/events", headers=headers)
    resp = conn.getresponse()
    raw = resp.read().decode("utf-8")
    conn.close()
    events = []
    for block in raw.strip().split("\n\n"):
        if not block.strip():
            continue
        fields = dict(
            line.split(": ", 1) for line in block.split("\n") if ": " in line
        )
        events.append(
            {
                "id": int(fields["id"]),
                "event": fields["event"],
                "data": json.loads(fields["data"]),
            }
        )
    return events


class TestConversationEndpoints:
    def test_create_returns_url_safe_id(self, service):
        conv_id = create_conversation(service)
        assert conv_id.isalnum()

    def test_capacity_cap_yields_503(self, service):
        for _ in range(3):
            create_conversation(service)
        status, body = request(service, "POST", "/conversations")
        assert status == 503

    def test_default_limits(self):
        assert ServiceConfig().max_conversations == 10_000
        assert ServiceConfig().max_attachment_bytes == 10 * 1024 * 1024

    def test_question_unknown_conversation_404(self, service):
        status, _ = request(service, "POST", "/conversations/nope/questions", {"text": "hi"})
        assert status == 404

    def test_turn_in_flight_409(self, service):
        conv_id = create_conversation(service)
        state = service.app.get(conv_id)
        with state.lock:
            state.turn_in_flight = True
        status, _ = request(
            service, "POST", f"/conversations/{conv_id}/questions", {"text": "hello"}
        )
        assert status == 409
        with state.lock:
            state.turn_in_flight = False

    def test_oversized_attachment_413(self, service):
        conv_id = create_conversation(service)
        big = b"x" * (service.config.max_attachment_bytes + 1)
        status, _ = request(
            service,
            "POST",
            f"/conversations/{conv_id}/questions",
            big,
            headers={"Content-Type": "application/octet-stream", "Content-Length": str(len(big))},
        )
        assert status == 413

    def test_empty_text_400(self, service):
        conv_id = create_conversation(service)
        status, _ = request(service, "POST", f"/conversations/{conv_id}/questions", {"text": " "})
        assert status == 400

    def test_multipart_question(self, service):
        conv_id = create_conversation(service)
        boundary = "testboundary42"
        body = (
            f"--{boundary}\r\n"
            'Content-Disposition: form-data; name="text"\r\n\r\n'
            "How many fountains are there?\r\n"
            f"--{boundary}--\r\n"
        ).encode()
        status, reply = request(
            service,
            "POST",
            f"/conversations/{conv_id}/questions",
            body,
            headers={"Content-Type": f"multipart/form-data; boundary={boundary}"},
        )
        assert status == 202, reply

    def test_multipart_with_pdf_attachment(self, service):
        from .test_pdfmd import make_pdf

        conv_id = create_conversation(service)
        boundary = "pdfboundary7"
        pdf = make_pdf(["context page"])
        body = (
            f"--{boundary}\r\n"
            'Content-Disposition: form-data; name="text"\r\n\r\n'
            "How many fountains are there?\r\n"
            f"--{boundary}\r\n"
            'Content-Disposition: form-data; name="pdf"; filename="context.pdf"\r\n'
            "Content-Type: application/pdf\r\n"
            "Content-Transfer-Encoding: binary\r\n\r\n"
        ).encode() + pdf + f"\r\n--{boundary}--\r\n".encode()
        status, reply = request(
            service,
            "POST",
            f"/conversations/{conv_id}/questions",
            body,
            headers={"Content-Type": f"multipart/form-data; boundary={boundary}"},
        )
        assert status == 202, reply
        deadline = time.time() + 10
        state = service.app.get(conv_id)
        while time.time() < deadline:
            with state.lock:
                if not state.turn_in_flight:
                    break
            time.sleep(0.02)
        events = read_sse(service, conv_id)
        assert events[-1]["event"] == "final"


class TestDatasets:
    def test_dataset_metadata_with_source_url(self, service):
        status, body = request(service, "GET", "/datasets/fountains")
        assert status == 200
        assert body["source_url"].startswith("https://")
        assert body["title"] == "Brunnen der Stadt"

    def test_unknown_dataset_404(self, service):
        status, _ = request(service, "GET", "/datasets/nope")
        assert status == 404


class TestEventsAndTrace:
    def test_completed_turn_replay_ends_with_final(self, service):
        conv_id = create_conversation(service)
        ask_and_wait(service, conv_id, "How many fountains are there?")
        events = read_sse(service, conv_id)
        assert events[-1]["event"] == "final"
        assert events[0]["event"] == "reformulation"

    def test_rejection_stream_has_single_terminal(self, service):
        conv_id = create_conversation(service)
        ask_and_wait(service, conv_id, "How many unicorn stables?")
        events = read_sse(service, conv_id)
        terminal = [e for e in events if e["event"] in ("final", "rejection", "error")]
        assert [e["event"] for e in terminal] == ["rejection"]

    def test_reconnect_resumes_after_last_event_id(self, service):
        conv_id = create_conversation(service)
        ask_and_wait(service, conv_id, "How many fountains are there?")
        all_events = read_sse(service, conv_id)
        resumed = read_sse(service, conv_id, after=all_events[4]["id"])
        assert [e["id"] for e in resumed] == [e["id"] for e in all_events[5:]]

    def test_live_stream_sees_events_while_running(self, service):
        conv_id = create_conversation(service)
        status, _ = request(
            service, "POST", f"/conversations/{conv_id}/questions",
            {"text": "How many fountains are there?"},
        )
        assert status == 202
        events = read_sse(service, conv_id)  # tails until terminal
        assert events[-1]["event"] == "final"

    def test_trace_matches_live_event_stream(self, service):
        conv_id = create_conversation(service)
        ask_and_wait(service, conv_id, "How many fountains are there?")
        live = read_sse(service, conv_id)
        status, raw = request(service, "GET", f"/conversations/{conv_id}/trace")
        assert status == 200
        trace_lines = [json.loads(line) for line in raw.decode("utf-8").strip().split("\n")]
        assert [e["data"] for e in live] == trace_lines

    def test_trace_covers_multiple_turns(self, service):
        conv_id = create_conversation(service)
        ask_and_wait(service, conv_id, "How many fountains are there?")
        ask_and_wait(service, conv_id, "How many parking spaces in total?")
        status, raw = request(service, "GET", f"/conversations/{conv_id}/trace")
        turns = {json.loads(line)["turn"] for line in raw.decode().strip().split("\n")}
        assert turns == {1, 2}

    def test_events_unknown_conversation_404(self, service):
        status, _ = request(service, "GET", "/conversations/ghost/events")
        assert status == 404
