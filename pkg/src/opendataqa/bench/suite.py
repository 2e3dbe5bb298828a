"""Benchmark suites: parameterized question templates and their expansion.

A suite is a JSON manifest listing template files.  Each template carries
a text with named placeholders and one binding map per concrete question;
ground truth and relevant dataset ids may use the same placeholders.
Negative templates (no relevant datasets, no ground truth) test the
rejection path.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

from ..errors import BenchError, UnboundPlaceholder

_PLACEHOLDER_RE = re.compile(r"\{([a-zA-Z_][a-zA-Z0-9_]*)\}")


@dataclass(frozen=True)
class QuestionTemplate:
    id: str
    text_template: str
    bindings: tuple[dict, ...]
    relevant_dataset_ids: tuple[str, ...]
    ground_truth: str
    category: str = ""
    required_ops: tuple[str, ...] = ()
    negative: bool = False
    script: str | None = None  # informational ground-truth analysis source

    def __post_init__(self):
        relevant_empty = len(self.relevant_dataset_ids) == 0
        truth_empty = not self.ground_truth
        if not (self.negative == relevant_empty == truth_empty):
            raise BenchError(
                f"template {self.id!r}: negative <=> no relevant datasets <=> empty "
                f"ground truth must all agree"
            )
        if not self.bindings:
            raise BenchError(f"template {self.id!r}: needs at least one binding")


@dataclass(frozen=True)
class BenchQuestion:
    id: str
    template_id: str
    text: str
    relevant_dataset_ids: tuple[str, ...]
    ground_truth: str
    category: str
    required_ops: tuple[str, ...]
    negative: bool


def _fill(template_id: str, text: str, binding: dict) -> str:
    filled = text
    for key, value in binding.items():
        filled = filled.replace("{" + key + "}", str(value))
    leftover = _PLACEHOLDER_RE.search(filled)
    if leftover:
        raise UnboundPlaceholder(template_id, leftover.group(1))
    return filled


def expand(templates: list[QuestionTemplate]) -> list[BenchQuestion]:
    """One concrete question per binding; raises on unfilled placeholders."""
    questions: list[BenchQuestion] = []
    for template in templates:
        for i, binding in enumerate(template.bindings):
            questions.append(
                BenchQuestion(
                    id=f"{template.id}#{i}",
                    template_id=template.id,
                    text=_fill(template.id, template.text_template, binding),
                    relevant_dataset_ids=tuple(
                        _fill(template.id, d, binding) for d in template.relevant_dataset_ids
                    ),
                    ground_truth=(
                        _fill(template.id, template.ground_truth, binding)
                        if template.ground_truth
                        else ""
                    ),
                    category=template.category,
                    required_ops=template.required_ops,
                    negative=template.negative,
                )
            )
    return questions


def parse_template(doc: dict, source: str = "<memory>") -> QuestionTemplate:
    try:
        return QuestionTemplate(
            id=doc["id"],
            text_template=doc["text_template"],
            bindings=tuple(doc.get("bindings", [{}])),
            relevant_dataset_ids=tuple(doc.get("relevant_dataset_ids", [])),
            ground_truth=doc.get("ground_truth", ""),
            category=doc.get("category", ""),
            required_ops=tuple(doc.get("required_ops", [])),
            negative=bool(doc.get("negative", False)),
            script=doc.get("script"),
        )
    except KeyError as exc:
        raise BenchError(f"template {source}: missing key {exc.args[0]!r}") from None


def load_suite(path: str | Path) -> tuple[str, list[QuestionTemplate]]:
    """Load a suite manifest; returns (suite name, templates)."""
    path = Path(path)
    doc = json.loads(path.read_text("utf-8"))
    if not isinstance(doc, dict) or "templates" not in doc:
        raise BenchError(f"{path}: suite manifest needs a 'templates' list")
    templates = []
    for entry in doc["templates"]:
        if isinstance(entry, str):
            tpath = path.parent / entry
            templates.append(parse_template(json.loads(tpath.read_text("utf-8")), str(tpath)))
        else:
            templates.append(parse_template(entry))
    return doc.get("name", path.stem), templates
