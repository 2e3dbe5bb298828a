from __future__ import annotations

import json

import pytest

from opendataqa.catalog import ingest_catalog
from opendataqa.embedding import HashedNgramEmbedder
from opendataqa.gateway import Gateway, PricingTable, ScriptedProvider
from opendataqa.retrieval import build_index_for_catalog


def doc(doc_id: str, title: str, summary: str, fields=(), categories=("misc",), language="de"):
    return {
        "id": doc_id,
        "title": title,
        "summary": summary,
        "categories": list(categories),
        "fields": [
            {"name": n, "type_hint": t, "description": d} for n, t, d in fields
        ],
        "publication_date": "2024-01-15",
        "source_url": f"https://data.example.org/{doc_id}",
        "language": language,
    }


SMALL_CATALOG_DOCS = [
    doc(
        "parking_public",
        "Öffentliche Parkplätze",
        "Alle öffentlichen Parkplätze der Stadt mit Kapazität.",
        fields=[("lot", "text", "lot name"), ("spaces", "integer", "number of spaces")],
        categories=("mobility",),
    ),
    doc(
        "parking_disabled",
        "Behindertenparkplätze",
        "Parkplätze für Menschen mit Behinderung.",
        fields=[("lot", "text", "lot name"), ("spaces", "integer", "number of spaces")],
        categories=("mobility",),
    ),
    doc(
        "fountains",
        "Brunnen der Stadt",
        "Standorte aller öffentlichen Brunnen (fountains) im Stadtgebiet.",
        fields=[("name", "text", "fountain name"), ("geometry", "geometry", "location")],
        categories=("base maps",),
    ),
    doc(
        "bike_counters",
        "Velozählstellen",
        "Automatische Zählstellen für den Veloverkehr, urban cycling counters.",
        fields=[("station", "text", "station"), ("daily_count", "integer", "riders")],
        categories=("mobility",),
    ),
]


def write_catalog_to(tmp_path, docs, payloads=None):
    payloads = payloads or {}
    meta_dir = tmp_path / "metadata"
    meta_dir.mkdir(exist_ok=True)
    entries = []
    for d in docs:
        path = meta_dir / f"{d['id']}.json"
        path.write_text(json.dumps(d, ensure_ascii=False), "utf-8")
        entry = {"metadata": f"metadata/{d['id']}.json"}
        if d["id"] in payloads:
            entry["payload"] = payloads[d["id"]]
        entries.append(entry)
    manifest = tmp_path / "manifest.json"
    manifest.write_text(json.dumps(entries), "utf-8")
    return manifest


@pytest.fixture()
def small_catalog(tmp_path):
    return ingest_catalog(write_catalog_to(tmp_path, SMALL_CATALOG_DOCS))


@pytest.fixture()
def small_index(small_catalog):
    return build_index_for_catalog(small_catalog, HashedNgramEmbedder())


@pytest.fixture()
def embedder():
    return HashedNgramEmbedder()


def scripted_gateway(script) -> Gateway:
    return Gateway(ScriptedProvider(script), PricingTable.load(), sleep=lambda s: None)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion."""
    lines = {}
    for outcome in ("passed", "failed", "skipped"):
        for report in terminalreporter.stats.get(outcome, []):
            if getattr(report, "when", "call") != "call" and outcome != "skipped":
                continue
            if "test_acceptance.py" in report.nodeid:
                name = report.nodeid.split("::")[-1]
                lines[name] = outcome.upper()
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name in sorted(lines):
            terminalreporter.write_line(f"{lines[name]:7s} {name}")
