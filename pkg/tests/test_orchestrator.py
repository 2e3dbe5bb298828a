from __future__ import annotations

import json

import pytest

from opendataqa.catalog import ingest_catalog
from opendataqa.embedding import HashedNgramEmbedder
from opendataqa.events import EventLog, TERMINAL_TYPES
from opendataqa.orchestrator import Orchestrator, RouteDecision
from opendataqa.retrieval import RetrievalConfig, UserQuestion, build_index_for_catalog

from .conftest import doc, scripted_gateway, write_catalog_to


def build_catalog(tmp_path):
    tmp_path.mkdir(parents=True, exist_ok=True)
    (tmp_path / "fountains.csv").write_text(
        "name,year\n" + "\n".join(f"fountain {i},{1900 + i}" for i in range(42)), "utf-8"
    )
    (tmp_path / "parking_public.csv").write_text(
        "lot,spaces\n" + "\n".join(f"lot{i},{100 + i}" for i in range(10)), "utf-8"
    )
    docs = [
        doc(
            "fountains",
            "Brunnen der Stadt",
            "Standorte aller öffentlichen Brunnen.",
            fields=[("name", "text", ""), ("year", "integer", "")],
        ),
        doc(
            "parking_public",
            "Öffentliche Parkplätze",
            "Parkplätze mit Kapazität.",
            fields=[("lot", "text", ""), ("spaces", "integer", "")],
        ),
        doc("broken", "Kaputt", "Payload fehlt.", fields=[("x", "integer", "")]),
    ]
    manifest = write_catalog_to(
        tmp_path,
        docs,
        payloads={"fountains": "fountains.csv", "parking_public": "parking_public.csv", "broken": "missing.csv"},
    )
    return ingest_catalog(manifest)


def search_and_report(ids, query="Brunnen"):
    return [
        {"tool_calls": [{"name": "search_datasets", "arguments": {"query": query}}]},
        {"tool_calls": [{"name": "report_results", "arguments": {"dataset_ids": ids}}]},
    ]


FULL_SCRIPT = {
    "scenarios": [
        # routers (distinguished by declared route tool + question match)
        {
            "match": "per lot",
            "requires_tool": "route",
            "turns": [{"tool_calls": [{"name": "route", "arguments": {"target": "analysis", "rationale": "data loaded"}}]}],
        },
        {
            "match": "parking",
            "requires_tool": "route",
            "turns": [{"tool_calls": [{"name": "route", "arguments": {"target": "retrieval", "rationale": "new topic"}}]}],
        },
        # retrieval stages
        {
            "match": "fountains",
            "requires_tool": "report_results",
            "turns": search_and_report(["fountains"]),
        },
        {
            "match": "parking",
            "requires_tool": "report_results",
            "turns": search_and_report(["parking_public"], query="Parkplätze"),
        },
        {
            "match": "unicorn",
            "requires_tool": "report_results",
            "turns": [{"tool_calls": [{"name": "report_results", "arguments": {"dataset_ids": []}}]}],
        },
        {
            "match": "broken",
            "requires_tool": "report_results",
            "turns": [{"tool_calls": [{"name": "report_results", "arguments": {"dataset_ids": ["broken"]}}]}],
        },
        # analysis stages (no tools declared)
        {
            "match": "How many fountains",
            "turns": [
                {"text": "Count.\n```\nn = len(fountains)\nfinal_answer(f'There are {n} fountains')\n```"}
            ],
        },
        {
            "match": "per lot",
            "turns": [
                {"text": "Reuse n.\n```\nfinal_answer(f'{n} fountains and {len(parking_public)} lots')\n```"}
            ],
        },
        {
            "match": "parking",
            "turns": [
                {"text": "Sum.\n```\ntotal = sum(parking_public['spaces'])\nfinal_answer(f'{total} spaces')\n```"}
            ],
        },
    ]
}


@pytest.fixture()
def orchestrator(tmp_path):
    catalog = build_catalog(tmp_path / "cat")
    embedder = HashedNgramEmbedder()
    return Orchestrator(
        catalog,
        build_index_for_catalog(catalog, embedder),
        embedder,
        scripted_gateway(FULL_SCRIPT),
        retrieval_config=RetrievalConfig(max_tool_rounds=4),
        data_dir=tmp_path / "data",
    )


class TestFirstTurn:
    def test_answer_with_datasets(self, orchestrator):
        conv = orchestrator.new_conversation("c1")
        response = orchestrator.handle_turn(conv, UserQuestion(text="How many fountains are there?"))
        assert response.kind == "answer"
        assert "42" in response.text
        assert response.dataset_ids == ["fountains"]
        assert response.final.terminated_by == "final_answer_tool"
        types = [e.type for e in conv.events.events()]
        assert types[0] == "reformulation"
        assert "datasets_selected" in types
        assert types[-1] == "final"

    def test_rejection_creates_no_session_and_no_analysis(self, orchestrator):
        conv = orchestrator.new_conversation("c2")
        response = orchestrator.handle_turn(conv, UserQuestion(text="How many unicorn stables?"))
        assert response.kind == "rejection"
        assert conv.session is None
        types = [e.type for e in conv.events.events()]
        assert types[-1] == "rejection"
        assert "step_started" not in types
        assert "final" not in types
        # zero analysis tokens: the only usage recorded is retrieval usage
        rejection = conv.events.events()[-1]
        assert "usage" in rejection.payload

    def test_payload_failure_is_user_safe_error(self, orchestrator):
        conv = orchestrator.new_conversation("c3")
        response = orchestrator.handle_turn(conv, UserQuestion(text="broken data please"))
        assert response.kind == "error"
        assert "could not be loaded" in response.text
        last = conv.events.events()[-1]
        assert last.type == "error"
        assert "missing.csv" in last.payload["detail"]

    def test_audit_log_persisted_as_jsonl(self, orchestrator, tmp_path):
        conv = orchestrator.new_conversation("c4")
        orchestrator.handle_turn(conv, UserQuestion(text="How many fountains are there?"))
        path = orchestrator.data_dir / "conversations" / "c4" / "audit.jsonl"
        lines = path.read_text("utf-8").strip().split("\n")
        parsed = [json.loads(line) for line in lines]
        assert [p["seq"] for p in parsed] == list(range(1, len(parsed) + 1))
        assert parsed[-1]["type"] == "final"


class TestFollowups:
    def test_followup_analysis_reuses_session(self, orchestrator):
        conv = orchestrator.new_conversation("c5")
        orchestrator.handle_turn(conv, UserQuestion(text="How many fountains are there?"))
        session = conv.session
        # router will say retrieval for "parking" -> merges parking_public
        r2 = orchestrator.handle_turn(conv, UserQuestion(text="How many parking spaces in total?"))
        assert r2.kind == "answer"
        assert "1045" in r2.text  # 100+101+...+109
        assert conv.active_datasets == ["fountains", "parking_public"]
        assert conv.session is session
        # follow-up routed to analysis reuses binding n from turn 1
        r3 = orchestrator.handle_turn(conv, UserQuestion(text="and per lot?"))
        assert r3.kind == "answer"
        assert "42 fountains and 10 lots" in r3.text

    def test_active_datasets_grow_monotonically(self, orchestrator):
        conv = orchestrator.new_conversation("c6")
        orchestrator.handle_turn(conv, UserQuestion(text="How many fountains are there?"))
        before = list(conv.active_datasets)
        orchestrator.handle_turn(conv, UserQuestion(text="How many parking spaces in total?"))
        assert conv.active_datasets[: len(before)] == before
        assert len(conv.active_datasets) > len(before)

    def test_router_fallback_on_provider_failure(self, tmp_path):
        catalog = build_catalog(tmp_path / "cat")
        embedder = HashedNgramEmbedder()
        script = {
            "scenarios": [
                {"requires_tool": "route", "turns": [{"error": "unavailable"}]},
                {"requires_tool": "report_results", "turns": search_and_report(["fountains"])},
                {
                    "turns": [
                        {"text": "p\n```\nfinal_answer(str(len(fountains)))\n```"},
                        {"text": "p\n```\nfinal_answer('again ' + str(len(fountains)))\n```"},
                    ]
                },
            ]
        }
        orch = Orchestrator(
            catalog,
            build_index_for_catalog(catalog, embedder),
            embedder,
            scripted_gateway(script),
            retrieval_config=RetrievalConfig(max_tool_rounds=4),
        )
        conv = orch.new_conversation()
        orch.handle_turn(conv, UserQuestion(text="How many fountains are there?"))
        decision = orch.route_followup(conv, UserQuestion(text="and now?"))
        assert decision.target == "analysis"
        assert "fallback" in decision.rationale

    def test_router_fallback_without_actives_is_retrieval(self, orchestrator):
        conv = orchestrator.new_conversation("c8")
        conv.turns.append((UserQuestion(text="x"), None))  # simulate prior turn, no actives
        decision = orchestrator.route_followup(conv, UserQuestion(text="no scenario matches this"))
        assert isinstance(decision, RouteDecision)
        assert decision.target == "retrieval"


class TestEventLog:
    def test_seq_strictly_increasing_and_monotone_ts(self, orchestrator):
        conv = orchestrator.new_conversation("c9")
        orchestrator.handle_turn(conv, UserQuestion(text="How many fountains are there?"))
        events = conv.events.events()
        seqs = [e.seq for e in events]
        assert seqs == sorted(seqs) and len(set(seqs)) == len(seqs)
        ts = [e.ts for e in events]
        assert ts == sorted(ts)

    def test_no_event_after_terminal_within_turn(self, orchestrator):
        conv = orchestrator.new_conversation("c10")
        orchestrator.handle_turn(conv, UserQuestion(text="How many fountains are there?"))
        orchestrator.handle_turn(conv, UserQuestion(text="How many parking spaces in total?"))
        by_turn: dict[int, list] = {}
        for e in conv.events.events():
            by_turn.setdefault(e.turn, []).append(e)
        for turn_events in by_turn.values():
            terminal_positions = [i for i, e in enumerate(turn_events) if e.type in TERMINAL_TYPES]
            assert terminal_positions == [len(turn_events) - 1]

    def test_replay_equals_live(self, orchestrator):
        conv = orchestrator.new_conversation("c11")
        orchestrator.handle_turn(conv, UserQuestion(text="How many fountains are there?"))
        replayed = EventLog.replay_jsonl(conv.events.to_jsonl())
        assert replayed == conv.events.events()

    def test_wait_for_events_returns_fresh(self, orchestrator):
        conv = orchestrator.new_conversation("c12")
        orchestrator.handle_turn(conv, UserQuestion(text="How many fountains are there?"))
        all_events = conv.events.events()
        tail = conv.events.wait_for_events(after_seq=all_events[-2].seq, timeout=0.01)
        assert tail == [all_events[-1]]

    def test_replay_complete_audit_content(self, orchestrator):
        conv = orchestrator.new_conversation("c13")
        orchestrator.handle_turn(conv, UserQuestion(text="How many fountains are there?"))
        events = conv.events.events()
        reformulations = [e.payload["text"] for e in events if e.type == "reformulation"]
        assert reformulations == ["Brunnen"]
        selected = next(e for e in events if e.type == "datasets_selected")
        assert selected.payload["dataset_ids"] == ["fountains"]
        step = next(e for e in events if e.type == "step_started")
        assert "len(fountains)" in step.payload["code"]
        result = next(e for e in events if e.type == "step_result")
        assert result.payload["status"] == "ok"
