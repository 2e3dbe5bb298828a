"""Metric aggregation and report rendering.

Rates (recall, precision, answerability, correctness) aggregate as means;
latency, token, and cost aggregates are medians (lower-middle element for
even counts) because those distributions are skewed.  Everything here is
a pure function of the records.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..interpreter.artifacts import make_artifact

NEGATIVE_CONVENTION = (
    "Convention: on negative questions a correct rejection scores recall=1 "
    "and precision=1, a spurious retrieval scores 0; an empty retrieval on "
    "a positive question scores precision=0."
)


def median_lower_middle(values) -> float:
    """Median using the lower-middle element for even counts."""
    ordered = sorted(values)
    if not ordered:
        raise ValueError("median of an empty sequence")
    return ordered[(len(ordered) - 1) // 2]


def _mean(values) -> float:
    values = list(values)
    return sum(values) / len(values) if values else 0.0


@dataclass
class MetricsReport:
    stage: str  # retrieval | analysis
    model_id: str
    config_hash: str
    n_questions: int
    recall_mean: float | None = None
    precision_mean: float | None = None
    answerability_accuracy: float | None = None
    correctness_rate: float | None = None
    latency_median_s: float = 0.0
    input_tokens_median: float = 0.0
    output_tokens_median: float = 0.0
    reasoning_tokens_median: float = 0.0
    cost_median_usd: float = 0.0
    notes: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "report_version": 1,
            "stage": self.stage,
            "model_id": self.model_id,
            "config_hash": self.config_hash,
            "n_questions": self.n_questions,
            "recall_mean": self.recall_mean,
            "precision_mean": self.precision_mean,
            "answerability_accuracy": self.answerability_accuracy,
            "correctness_rate": self.correctness_rate,
            "latency_median_s": self.latency_median_s,
            "input_tokens_median": self.input_tokens_median,
            "output_tokens_median": self.output_tokens_median,
            "reasoning_tokens_median": self.reasoning_tokens_median,
            "cost_median_usd": self.cost_median_usd,
            "notes": self.notes,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "MetricsReport":
        doc = {k: v for k, v in doc.items() if k != "report_version"}
        return cls(**doc)


def aggregate(records: list[dict], stage: str, model_id: str = "", config_hash: str = "") -> MetricsReport:
    """Fold per-question records into one report; permutation-invariant."""
    if not records:
        raise ValueError("aggregate needs at least one record")
    report = MetricsReport(
        stage=stage,
        model_id=model_id or records[0].get("model_id", ""),
        config_hash=config_hash,
        n_questions=len(records),
        latency_median_s=median_lower_middle(r["latency_s"] for r in records),
        input_tokens_median=median_lower_middle(r["usage"]["input_tokens"] for r in records),
        output_tokens_median=median_lower_middle(r["usage"]["output_tokens"] for r in records),
        reasoning_tokens_median=median_lower_middle(
            r["usage"]["reasoning_tokens"] for r in records
        ),
        cost_median_usd=median_lower_middle(r["cost_usd"] for r in records),
        notes=[NEGATIVE_CONVENTION] if stage == "retrieval" else [],
    )
    if stage == "retrieval":
        report.recall_mean = _mean(r["recall"] for r in records)
        report.precision_mean = _mean(r["precision"] for r in records)
        report.answerability_accuracy = _mean(
            1.0 if r["answerability_correct"] else 0.0 for r in records
        )
    elif stage == "analysis":
        non_negative = [r for r in records if not r.get("negative", False)]
        if non_negative:
            report.correctness_rate = _mean(1.0 if r["correct"] else 0.0 for r in non_negative)
    else:
        raise ValueError(f"unknown stage {stage!r}")
    return report


_MD_COLUMNS = [
    ("model_id", "Model"),
    ("recall_mean", "Recall"),
    ("precision_mean", "Precision"),
    ("answerability_accuracy", "Answerability"),
    ("correctness_rate", "Correctness"),
    ("latency_median_s", "Latency (median s)"),
    ("input_tokens_median", "In tok (median)"),
    ("output_tokens_median", "Out tok (median)"),
    ("reasoning_tokens_median", "Reasoning tok (median)"),
    ("cost_median_usd", "Cost (median USD)"),
]


def _cell(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.4g}"
    return str(value)


def render_report(reports: list[MetricsReport], fmt: str = "json") -> str:
    """Render one or more per-model reports as json, markdown, or plot_spec."""
    if fmt == "json":
        return json.dumps([r.to_json() for r in reports], indent=2, ensure_ascii=False)
    if fmt == "md":
        lines = []
        for stage in ("retrieval", "analysis"):
            rows = [r for r in reports if r.stage == stage]
            if not rows:
                continue
            lines.append(f"## {stage.capitalize()} metrics")
            if rows[0].notes:
                lines.extend(rows[0].notes)
            lines.append("")
            lines.append("| " + " | ".join(label for _, label in _MD_COLUMNS) + " |")
            lines.append("|" + "|".join("---" for _ in _MD_COLUMNS) + "|")
            for r in rows:
                doc = r.to_json()
                lines.append("| " + " | ".join(_cell(doc[key]) for key, _ in _MD_COLUMNS) + " |")
            lines.append("")
        return "\n".join(lines)
    if fmt == "plot_spec":
        data = []
        for r in reports:
            for metric in ("recall_mean", "precision_mean", "answerability_accuracy", "correctness_rate"):
                value = getattr(r, metric)
                if value is not None:
                    data.append({"model": r.model_id, "rate": value, "metric": f"{r.stage}:{metric}"})
        payload = {
            "mark": "bar",
            "title": "Benchmark rates per model",
            "x": {"field": "model"},
            "y": {"field": "rate"},
            "series": "metric",
            "data": data,
        }
        artifact = make_artifact("plot_spec", payload)  # validates against the schema
        return json.dumps(artifact.to_json(), indent=2, ensure_ascii=False)
    raise ValueError(f"unknown report format {fmt!r}")
