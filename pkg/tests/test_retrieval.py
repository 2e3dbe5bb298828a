from __future__ import annotations

import json

import pytest

from opendataqa.embedding import SearchHit
from opendataqa.retrieval import (
    RetrievalConfig,
    UserQuestion,
    dedupe_hits,
    metadata_snippet,
    retrieve,
    search_datasets,
)

from .conftest import doc, scripted_gateway, write_catalog_to
from .test_pdfmd import make_pdf


def run_retrieve(script, catalog, index, embedder, config=None, question="parking question"):
    return retrieve(
        UserQuestion(text=question),
        catalog,
        index,
        embedder,
        scripted_gateway(script),
        config or RetrievalConfig(max_tool_rounds=4),
    )


SEARCH_THEN_REPORT = [
    {"tool_calls": [{"name": "search_datasets", "arguments": {"query": "öffentliche Parkplätze"}}]},
    {
        "tool_calls": [
            {
                "name": "report_results",
                "arguments": {
                    "dataset_ids": ["parking_public", "parking_disabled"],
                    "justification": "both parking datasets are needed for the ratio",
                },
            }
        ]
    },
]


class TestRetrieveLoop:
    def test_search_then_report(self, small_catalog, small_index, embedder):
        outcome = run_retrieve(SEARCH_THEN_REPORT, small_catalog, small_index, embedder)
        assert outcome.dataset_ids == ["parking_public", "parking_disabled"]
        assert outcome.rejected is False
        assert outcome.reformulations == ["öffentliche Parkplätze"]
        assert outcome.trace.events[-1]["type"] == "reported"
        assert outcome.usage.total() > 0
        assert outcome.latency_s >= 0

    def test_empty_report_is_rejection(self, small_catalog, small_index, embedder):
        script = [{"tool_calls": [{"name": "report_results", "arguments": {"dataset_ids": []}}]}]
        outcome = run_retrieve(script, small_catalog, small_index, embedder)
        assert outcome.rejected is True
        assert outcome.dataset_ids == []

    def test_hallucinated_id_dropped(self, small_catalog, small_index, embedder):
        script = [
            {
                "tool_calls": [
                    {"name": "report_results", "arguments": {"dataset_ids": ["nonexistent_id"]}}
                ]
            }
        ]
        outcome = run_retrieve(script, small_catalog, small_index, embedder)
        assert outcome.rejected is True
        assert any("nonexistent_id" in w for w in outcome.trace.warnings())

    def test_never_reporting_forces_rejection(self, small_catalog, small_index, embedder):
        script = [{"text": "I think the answer is 42."} for _ in range(6)]
        outcome = run_retrieve(script, small_catalog, small_index, embedder)
        assert outcome.rejected is True
        assert outcome.trace.events[-1]["justification"] == "agent_no_report"

    def test_subquery_budget_enforced(self, small_catalog, small_index, embedder):
        searches = [
            {"tool_calls": [{"name": "search_datasets", "arguments": {"query": f"q{i}"}}]}
            for i in range(5)
        ]
        script = searches + [
            {"tool_calls": [{"name": "report_results", "arguments": {"dataset_ids": []}}]}
        ]
        outcome = run_retrieve(
            script, small_catalog, small_index, embedder, RetrievalConfig(max_tool_rounds=8)
        )
        assert len(outcome.reformulations) == 3
        assert any("budget exhausted" in w for w in outcome.trace.warnings())

    def test_second_report_ignored(self, small_catalog, small_index, embedder):
        script = [
            {
                "tool_calls": [
                    {"name": "report_results", "arguments": {"dataset_ids": ["fountains"]}},
                    {"name": "report_results", "arguments": {"dataset_ids": []}},
                ]
            }
        ]
        outcome = run_retrieve(script, small_catalog, small_index, embedder)
        assert outcome.dataset_ids == ["fountains"]
        assert any("after report ignored" in w for w in outcome.trace.warnings())

    def test_trace_hits_follow_subqueries(self, small_catalog, small_index, embedder):
        outcome = run_retrieve(SEARCH_THEN_REPORT, small_catalog, small_index, embedder)
        kinds = [e["type"] for e in outcome.trace.events]
        sq = kinds.index("subquery_issued")
        assert kinds[sq + 1] == "hits_returned"

    def test_trace_jsonl_round_trips(self, small_catalog, small_index, embedder):
        outcome = run_retrieve(SEARCH_THEN_REPORT, small_catalog, small_index, embedder)
        lines = outcome.trace.to_jsonl().strip().split("\n")
        parsed = [json.loads(line) for line in lines]
        assert parsed[0]["type"] == "trace_header"
        assert parsed[0]["prompt_hash"]
        assert parsed[-1]["type"] == "reported"

    def test_malformed_tool_arguments_surfaced_not_fatal(self, small_catalog, small_index, embedder):
        script = [
            {"tool_calls": [{"name": "search_datasets", "arguments": {"top_k": 5}}]},
            {"tool_calls": [{"name": "report_results", "arguments": {"dataset_ids": []}}]},
        ]
        outcome = run_retrieve(script, small_catalog, small_index, embedder)
        assert outcome.rejected is True
        assert any("malformed" in w for w in outcome.trace.warnings())

    def test_empty_question_rejected(self, small_catalog, small_index, embedder):
        with pytest.raises(ValueError):
            run_retrieve(SEARCH_THEN_REPORT, small_catalog, small_index, embedder, question="  ")

    def test_scripted_loop_is_byte_deterministic(self, small_catalog, small_index, embedder):
        a = run_retrieve(SEARCH_THEN_REPORT, small_catalog, small_index, embedder)
        b = run_retrieve(SEARCH_THEN_REPORT, small_catalog, small_index, embedder)
        assert a.trace.to_jsonl() == b.trace.to_jsonl()
        assert a.usage == b.usage
        assert a.dataset_ids == b.dataset_ids


class TestSearchTool:
    def test_title_query_ranks_its_dataset_high(self, small_catalog, small_index, embedder):
        hits = search_datasets(small_catalog, small_index, embedder, "Velozählstellen", 3)
        assert "bike_counters" in [h.dataset_id for h, _ in hits]

    def test_snippet_contains_title_and_fields(self, small_catalog, small_index, embedder):
        hits = search_datasets(small_catalog, small_index, embedder, "Brunnen", 4)
        by_id = {h.dataset_id: s for h, s in hits}
        assert "Brunnen der Stadt" in by_id["fountains"]
        assert "geometry" in by_id["fountains"]

    def test_snippet_truncated_for_huge_metadata(self, tmp_path, embedder):
        huge = doc(
            "huge",
            "Monster-Metadaten",
            "x" * 50_000,
            fields=[(f"col{i}", "text", "d" * 100) for i in range(50)],
        )
        from opendataqa.catalog import ingest_catalog

        catalog = ingest_catalog(write_catalog_to(tmp_path, [huge]))
        snippet = metadata_snippet(catalog, "huge", 2000)
        assert len(snippet) <= 2000

    def test_dedupe_hits_keeps_max_score(self):
        merged = dedupe_hits(
            [
                [SearchHit("a", 0.9), SearchHit("b", 0.5)],
                [SearchHit("b", 0.8), SearchHit("c", 0.7)],
            ]
        )
        assert [(h.dataset_id, h.score) for h in merged] == [("a", 0.9), ("b", 0.8), ("c", 0.7)]


class TestQuestionAttachments:
    def test_pdf_converted_to_markdown_part(self):
        q = UserQuestion.build("see attachment", pdf_bytes=make_pdf(["inhalt seite eins"]))
        assert "inhalt seite eins" in q.pdf_markdown
        msg = q.to_message()
        assert any(type(p).__name__ == "DocumentPart" for p in msg.parts)

    def test_image_encoded_base64(self):
        q = UserQuestion.build("what is this", image_bytes=b"\x89PNG fake")
        assert q.image_b64 is not None
        msg = q.to_message()
        assert any(type(p).__name__ == "ImagePart" for p in msg.parts)
