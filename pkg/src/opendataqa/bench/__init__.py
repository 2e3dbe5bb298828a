"""Reproducible benchmark harness for retrieval and analysis."""
from .judge import deterministic_judge, judge
from .metrics import MetricsReport, aggregate, median_lower_middle, render_report
from .runner import BenchEngine, run_analysis, run_retrieval
from .suite import BenchQuestion, QuestionTemplate, expand, load_suite

__all__ = [
    "BenchEngine",
    "BenchQuestion",
    "MetricsReport",
    "QuestionTemplate",
    "aggregate",
    "deterministic_judge",
    "expand",
    "judge",
    "load_suite",
    "median_lower_middle",
    "render_report",
    "run_analysis",
    "run_retrieval",
]
