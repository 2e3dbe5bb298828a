"""Benchmark runner: retrieval and analysis stages, assessed separately.

The analysis stage receives the ground-truth relevant datasets directly
(retrieval quality is measured on its own), runs the full agent loop in a
fresh sandbox session per question, and grades the textual answer.
Records are JSONL, one line per question, immutable once written.
"""
from __future__ import annotations

import hashlib
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .. import embedding
from ..analysis import AnalysisConfig, analyze
from ..catalog import Catalog, load_payload
from ..errors import OpenDataQAError
from ..gateway import Gateway, Usage
from ..interpreter import Session
from ..retrieval import RetrievalConfig, UserQuestion, retrieve
from .judge import judge
from .suite import BenchQuestion

log = logging.getLogger(__name__)


@dataclass
class BenchEngine:
    """Everything a benchmark run needs, assembled by the caller."""

    catalog: Catalog
    index: embedding.Index
    embedder: embedding.Embedder
    gateway: Gateway
    retrieval_config: RetrievalConfig
    analysis_config: AnalysisConfig
    judge_mode: str = "deterministic"
    judge_model: str = "gpt-4o"
    workers: int = 1

    def config_hash(self) -> str:
        doc = {
            "retrieval": vars(self.retrieval_config),
            "analysis": vars(self.analysis_config),
            "judge_mode": self.judge_mode,
        }
        return hashlib.sha256(json.dumps(doc, sort_keys=True, default=str).encode()).hexdigest()[:16]


def _usage_json(usage: Usage) -> dict:
    return usage.to_json()


def retrieval_scores(relevant: set[str], retrieved: set[str], rejected: bool) -> tuple[float, float]:
    """(recall, precision) per the documented negative-question convention."""
    if not relevant:  # negative question
        return (1.0, 1.0) if rejected else (0.0, 0.0)
    if not retrieved:
        return 0.0, 0.0
    overlap = len(relevant & retrieved)
    return overlap / len(relevant), overlap / len(retrieved)


def run_retrieval(
    questions: list[BenchQuestion],
    engine: BenchEngine,
    model: str,
    out_dir: str | Path | None = None,
) -> list[dict]:
    """Retrieval-stage records: recall/precision/answerability per question."""
    config = RetrievalConfig(**{**vars(engine.retrieval_config), "model": model})

    def one(question: BenchQuestion) -> dict:
        record: dict = {"question_id": question.id, "model_id": model, "negative": question.negative}
        try:
            outcome = retrieve(
                UserQuestion(text=question.text),
                engine.catalog,
                engine.index,
                engine.embedder,
                engine.gateway,
                config,
            )
        except OpenDataQAError as exc:
            log.warning("retrieval failed for %s: %s", question.id, exc)
            record.update(
                failed=True, error=str(exc), recall=0.0, precision=0.0,
                answerability_correct=False, retrieved=[], reformulations=[],
                latency_s=0.0, usage=_usage_json(Usage()), cost_usd=0.0,
            )
            return record
        relevant = set(question.relevant_dataset_ids)
        retrieved = set(outcome.dataset_ids)
        recall, precision = retrieval_scores(relevant, retrieved, outcome.rejected)
        answerable_pred = not outcome.rejected
        record.update(
            failed=False,
            recall=recall,
            precision=precision,
            answerable_pred=answerable_pred,
            answerability_correct=answerable_pred == (not question.negative),
            retrieved=sorted(retrieved),
            reformulations=outcome.reformulations,
            latency_s=outcome.latency_s,
            usage=_usage_json(outcome.usage),
            cost_usd=engine.gateway.cost(outcome.usage, model),
        )
        return record

    records = _run_pool(questions, one, engine.workers)
    if out_dir:
        _write_records(out_dir, "retrieval", records, engine, model)
    return records


def run_analysis(
    questions: list[BenchQuestion],
    engine: BenchEngine,
    model: str,
    out_dir: str | Path | None = None,
) -> list[dict]:
    """Analysis-stage records over non-negative questions, with ground-truth
    datasets supplied and answers graded by the judge."""
    positives = [q for q in questions if not q.negative]
    config = AnalysisConfig(**{**vars(engine.analysis_config), "model": model})

    def one(question: BenchQuestion) -> dict:
        record: dict = {"question_id": question.id, "model_id": model, "negative": False}
        try:
            datasets = [
                (engine.catalog.get(d), load_payload(engine.catalog, d))
                for d in question.relevant_dataset_ids
            ]
            final = analyze(
                UserQuestion(text=question.text),
                datasets,
                engine.gateway,
                Session(),
                config,
            )
        except OpenDataQAError as exc:
            log.warning("analysis failed for %s: %s", question.id, exc)
            record.update(
                failed=True, error=str(exc), correct=False, reason="engine_error",
                answer_text="", steps=0, latency_s=0.0,
                usage=_usage_json(Usage()), cost_usd=0.0, judge_fallback=False,
            )
            return record
        if final.terminated_by == "final_answer_tool":
            correct, fell_back = judge(
                final.text,
                question.ground_truth,
                mode=engine.judge_mode,
                gateway=engine.gateway,
                model=engine.judge_model,
                question=question.text,
            )
            reason = "" if correct else "judged_incorrect"
        else:
            correct, fell_back = False, False
            reason = final.terminated_by  # max_steps | provider_failure
        record.update(
            failed=False,
            correct=correct,
            reason=reason,
            answer_text=final.text,
            steps=len(final.steps),
            terminated_by=final.terminated_by,
            latency_s=final.latency_s,
            usage=_usage_json(final.usage),
            cost_usd=engine.gateway.cost(final.usage, model),
            judge_fallback=fell_back,
        )
        return record

    records = _run_pool(positives, one, engine.workers)
    if out_dir:
        _write_records(out_dir, "analysis", records, engine, model)
    return records


def _run_pool(questions, fn, workers: int) -> list[dict]:
    if workers <= 1:
        return [fn(q) for q in questions]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, questions))


def _write_records(out_dir: str | Path, stage: str, records: list[dict], engine: BenchEngine, model: str) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{stage}_records.jsonl"
    with path.open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    meta = {
        "stage": stage,
        "model_id": model,
        "config_hash": engine.config_hash(),
        "n_records": len(records),
    }
    (out / f"{stage}_meta.json").write_text(json.dumps(meta, indent=2), "utf-8")


def read_records(out_dir: str | Path, stage: str) -> tuple[list[dict], dict]:
    out = Path(out_dir)
    path = out / f"{stage}_records.jsonl"
    records = [json.loads(line) for line in path.read_text("utf-8").splitlines() if line.strip()]
    meta_path = out / f"{stage}_meta.json"
    meta = json.loads(meta_path.read_text("utf-8")) if meta_path.exists() else {}
    return records, meta
