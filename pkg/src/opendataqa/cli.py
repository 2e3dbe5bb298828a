"""Command line interface.

Subcommands: ingest (validate a catalog), index (embed it), serve (HTTP +
SSE service), ask (one-shot question, events printed as JSONL), bench run
and bench report.  All behavior is driven by the key-value config file;
with no config the bundled offline fixture and the scripted provider run.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import engine as engine_mod
from .bench import aggregate, expand, load_suite, render_report, run_analysis, run_retrieval
from .bench.runner import read_records
from .config import Config
from .errors import OpenDataQAError
from .retrieval import UserQuestion


def _load_config(path: str | None) -> Config:
    return Config.from_file(path) if path else Config()


def cmd_ingest(args) -> int:
    config = _load_config(args.config)
    if args.manifest:
        config.values["catalog_manifest"] = args.manifest
    catalog = engine_mod.build_catalog(config)
    print(f"catalog ok: {len(catalog)} datasets")
    for meta in catalog:
        print(f"  {meta.id}: {meta.title}")
    return 0


def cmd_index(args) -> int:
    config = _load_config(args.config)
    catalog = engine_mod.build_catalog(config)
    embedder = engine_mod.build_embedder(config)
    from .retrieval import build_index_for_catalog

    index = build_index_for_catalog(catalog, embedder)
    print(f"indexed {len(index)} documents with {embedder.provider_id}")
    return 0


def cmd_serve(args) -> int:
    from .service import Service, ServiceConfig

    config = _load_config(args.config)
    orchestrator = engine_mod.build_orchestrator(config)
    service = Service(
        orchestrator,
        ServiceConfig(
            host=config.get("host", "127.0.0.1"),
            port=config.get_int("port", 8080),
        ),
    )
    service.start()
    print(f"listening on http://{service.config.host}:{service.port}")
    try:
        service._thread.join()
    except KeyboardInterrupt:
        print("shutting down")
        service.stop()
    return 0


def cmd_ask(args) -> int:
    config = _load_config(args.config)
    orchestrator = engine_mod.build_orchestrator(config)
    conversation = orchestrator.new_conversation()
    question = UserQuestion.build(
        args.question,
        image_bytes=Path(args.image).read_bytes() if args.image else None,
        pdf_bytes=Path(args.pdf).read_bytes() if args.pdf else None,
    )
    orchestrator.handle_turn(conversation, question)
    for event in conversation.events.events():
        print(event.to_json_line())
    return 0


def cmd_bench_run(args) -> int:
    config = _load_config(args.config)
    bench_engine = engine_mod.build_bench_engine(config)
    _name, templates = load_suite(args.suite)
    questions = expand(templates)
    out = Path(args.out)
    stages = ["retrieval", "analysis"] if args.stage == "both" else [args.stage]
    for stage in stages:
        if stage == "retrieval":
            records = run_retrieval(questions, bench_engine, args.model, out)
        else:
            records = run_analysis(questions, bench_engine, args.model, out)
        print(f"{stage}: {len(records)} records -> {out / (stage + '_records.jsonl')}")
    return 0


def cmd_bench_report(args) -> int:
    reports = []
    for stage in ("retrieval", "analysis"):
        path = Path(args.records) / f"{stage}_records.jsonl"
        if not path.exists():
            continue
        records, meta = read_records(args.records, stage)
        reports.append(
            aggregate(records, stage, meta.get("model_id", ""), meta.get("config_hash", ""))
        )
    if not reports:
        print("no record files found", file=sys.stderr)
        return 1
    print(render_report(reports, args.format))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opendataqa",
        description="Auditable question answering over open-government dataset catalogs.",
    )
    parser.add_argument("--verbose", "-v", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a catalog manifest")
    p.add_argument("--manifest", help="manifest path (default: bundled fixture)")
    p.add_argument("--config", help="config file")
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("index", help="embed the catalog and report index size")
    p.add_argument("--config", help="config file")
    p.set_defaults(fn=cmd_index)

    p = sub.add_parser("serve", help="run the HTTP + SSE service")
    p.add_argument("--config", help="config file")
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("ask", help="one-shot question; prints audit events as JSONL")
    p.add_argument("question")
    p.add_argument("--image", help="attach an image file")
    p.add_argument("--pdf", help="attach a PDF file")
    p.add_argument("--config", help="config file")
    p.set_defaults(fn=cmd_ask)

    p = sub.add_parser("bench", help="benchmark harness")
    bench_sub = p.add_subparsers(dest="bench_command", required=True)

    pr = bench_sub.add_parser("run", help="run a suite")
    pr.add_argument("--suite", required=True, help="suite manifest path")
    pr.add_argument("--stage", choices=["retrieval", "analysis", "both"], default="both")
    pr.add_argument("--model", default="gpt-4.1")
    pr.add_argument("--out", required=True, help="output directory for records")
    pr.add_argument("--config", help="config file")
    pr.set_defaults(fn=cmd_bench_run)

    pp = bench_sub.add_parser("report", help="aggregate records into a report")
    pp.add_argument("--in", dest="records", required=True, help="records directory")
    pp.add_argument("--format", choices=["json", "md", "plot_spec"], default="json")
    pp.set_defaults(fn=cmd_bench_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.fn(args)
    except OpenDataQAError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
