from __future__ import annotations

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from opendataqa import fixtures
from opendataqa.analysis import AnalysisConfig
from opendataqa.bench import (
    BenchEngine,
    aggregate,
    deterministic_judge,
    expand,
    judge,
    load_suite,
    median_lower_middle,
    render_report,
    run_analysis,
    run_retrieval,
)
from opendataqa.bench.runner import read_records, retrieval_scores
from opendataqa.bench.suite import parse_template
from opendataqa.catalog import ingest_catalog
from opendataqa.embedding import HashedNgramEmbedder
from opendataqa.errors import BenchError, UnboundPlaceholder
from opendataqa.gateway import Gateway, PricingTable, ScriptedProvider
from opendataqa.retrieval import RetrievalConfig, build_index_for_catalog

from .oracles import median_lower_middle as median_oracle


def make_template(**overrides):
    doc = {
        "id": "t1",
        "text_template": "How many {thing} in {district}?",
        "bindings": [
            {"thing": "fountains", "district": "Nord", "answer": "6"},
            {"thing": "fountains", "district": "Sued", "answer": "5"},
            {"thing": "trees", "district": "West", "answer": "4"},
        ],
        "relevant_dataset_ids": ["fountains"],
        "ground_truth": "{answer}",
        "category": "base maps",
        "required_ops": ["count"],
        "negative": False,
    }
    doc.update(overrides)
    return parse_template(doc)


class TestSuite:
    def test_three_bindings_three_questions(self):
        questions = expand([make_template()])
        assert len(questions) == 3
        assert questions[0].text == "How many fountains in Nord?"
        assert questions[0].ground_truth == "6"
        assert questions[1].id == "t1#1"

    def test_unbound_placeholder(self):
        template = make_template(bindings=[{"thing": "fountains"}])
        with pytest.raises(UnboundPlaceholder) as exc:
            expand([template])
        assert exc.value.name == "district"

    def test_negative_invariant_enforced(self):
        with pytest.raises(BenchError):
            make_template(negative=True)  # negative but relevant ids present
        with pytest.raises(BenchError):
            make_template(relevant_dataset_ids=[], ground_truth="")  # positive but empty

    def test_fixture_suite_expands_to_twelve(self):
        _name, templates = load_suite(fixtures.suite_path())
        questions = expand(templates)
        assert len(questions) == 12
        assert sum(1 for q in questions if q.negative) == 3
        assert sum(1 for q in questions if not q.negative) == 9

    def test_placeholders_in_ground_truth_and_ids(self):
        template = make_template(relevant_dataset_ids=["{thing}"])
        questions = expand([template])
        assert questions[0].relevant_dataset_ids == ("fountains",)

    def test_schema_hosts_a_full_scale_suite(self):
        # 70 parameterized templates expanding to 169 positives + 30 negatives
        templates = []
        positives_left = 169
        for i in range(60):  # 60 positive templates share the 169 questions
            n = min(positives_left - (59 - i), 3) if i < 59 else positives_left
            bindings = [{"d": f"district {j}", "answer": str(j)} for j in range(n)]
            positives_left -= n
            templates.append(
                parse_template(
                    {
                        "id": f"pos{i}",
                        "text_template": "How many things in {d}?",
                        "bindings": bindings,
                        "relevant_dataset_ids": ["things"],
                        "ground_truth": "{answer}",
                    }
                )
            )
        for i in range(10):  # 10 negative templates with 3 bindings each
            templates.append(
                parse_template(
                    {
                        "id": f"neg{i}",
                        "text_template": "Anything about {topic}?",
                        "bindings": [{"topic": f"topic {j}"} for j in range(3)],
                        "relevant_dataset_ids": [],
                        "ground_truth": "",
                        "negative": True,
                    }
                )
            )
        assert len(templates) == 70
        questions = expand(templates)
        assert len(questions) == 199
        assert sum(1 for q in questions if not q.negative) == 169
        assert sum(1 for q in questions if q.negative) == 30


class TestJudge:
    @pytest.mark.parametrize(
        "answer,reference,expected",
        [
            ("1,200 public parking spaces", "1200", True),
            ("42", "41", False),
            ("12.3456%", "12.3457", True),  # within 1e-4 relative
            ("12.46", "12.3457", False),
            ("The total is 7.5 km", "7.5", True),
            ("Nord", "Nord", True),
            ("The district Nord leads.", "Nord", True),
            ("the most common species is Linde.", "Linde", True),
            ("Ahorn is most common", "Linde", False),
            ("roughly 3'050 spaces", "3050", True),
            ("answer: 690 students.", "690", True),
            ("2828 meters apart", "1250", False),
        ],
    )
    def test_deterministic_examples(self, answer, reference, expected):
        assert deterministic_judge(answer, reference) is expected

    @given(
        st.floats(min_value=-1e6, max_value=1e6, allow_nan=False),
        st.floats(min_value=-1e6, max_value=1e6, allow_nan=False),
    )
    def test_numeric_tolerance_symmetric(self, a, b):
        from opendataqa.bench.judge import numbers_equal

        assert numbers_equal(a, b) == numbers_equal(b, a)

    def test_empty_reference_rejected(self):
        with pytest.raises(ValueError):
            deterministic_judge("42", "")

    def test_llm_judge_via_tool(self):
        script = [
            {"tool_calls": [{"name": "verdict", "arguments": {"correct": True, "reasoning": "same number"}}]}
        ]
        gw = Gateway(ScriptedProvider(script), PricingTable.load(), sleep=lambda s: None)
        correct, fell_back = judge("fourteen", "14", mode="llm", gateway=gw)
        assert correct is True
        assert fell_back is False

    def test_llm_judge_falls_back_on_provider_failure(self):
        gw = Gateway(ScriptedProvider([{"error": "unavailable"}]), PricingTable.load(), sleep=lambda s: None)
        correct, fell_back = judge("There are 14 fountains", "14", mode="llm", gateway=gw)
        assert correct is True
        assert fell_back is True


class TestScoring:
    def test_posite_partial_overlap(self):
        recall, precision = retrieval_scores({"A", "B", "C"}, {"A", "B", "D"}, rejected=False)
        assert recall == pytest.approx(2 / 3)
        assert precision == pytest.approx(2 / 3)

    def test_negative_rejected_counts_full(self):
        assert retrieval_scores(set(), set(), rejected=True) == (1.0, 1.0)

    def test_negative_spurious_counts_zero(self):
        assert retrieval_scores(set(), {"X"}, rejected=False) == (0.0, 0.0)

    def test_positive_empty_retrieval(self):
        assert retrieval_scores({"A"}, set(), rejected=True) == (0.0, 0.0)

    def test_perfect_run_scores_all_ones(self):
        # internally consistent convention: every negative rejected and every
        # positive retrieved perfectly -> recall = precision = answerability = 1
        records = []
        for i, (relevant, retrieved, rejected, negative) in enumerate(
            [
                ({"A", "B"}, {"A", "B"}, False, False),
                ({"C"}, {"C"}, False, False),
                (set(), set(), True, True),
                (set(), set(), True, True),
            ]
        ):
            recall, precision = retrieval_scores(relevant, retrieved, rejected)
            records.append(
                {
                    "question_id": f"q{i}",
                    "negative": negative,
                    "recall": recall,
                    "precision": precision,
                    "answerability_correct": (not rejected) == (not negative),
                    "latency_s": 1.0,
                    "usage": {"input_tokens": 1, "output_tokens": 1, "reasoning_tokens": 0},
                    "cost_usd": 0.0,
                }
            )
        report = aggregate(records, "retrieval")
        assert report.recall_mean == 1.0
        assert report.precision_mean == 1.0
        assert report.answerability_accuracy == 1.0


class TestAggregate:
    def records(self, latencies, correct=None):
        out = []
        for i, lat in enumerate(latencies):
            out.append(
                {
                    "question_id": f"q{i}",
                    "negative": False,
                    "correct": correct[i] if correct else True,
                    "latency_s": lat,
                    "usage": {"input_tokens": 100 * (i + 1), "output_tokens": 10, "reasoning_tokens": 0},
                    "cost_usd": 0.01 * (i + 1),
                }
            )
        return out

    def test_median_lower_middle(self):
        assert median_lower_middle([1, 2, 100]) == 2
        assert median_lower_middle([4, 1, 3, 2]) == 2  # lower middle of even count
        assert median_lower_middle([7]) == 7

    def test_correctness_166_of_169(self):
        records = self.records([1.0] * 169, correct=[True] * 166 + [False] * 3)
        report = aggregate(records, "analysis")
        assert report.correctness_rate == pytest.approx(166 / 169, abs=1e-12)
        assert abs(report.correctness_rate - 0.982) < 0.0005

    def test_permutation_invariant(self):
        import random

        records = self.records([5.0, 1.0, 3.0, 2.0], correct=[True, False, True, True])
        shuffled = records[:]
        random.Random(4).shuffle(shuffled)
        a = aggregate(records, "analysis").to_json()
        b = aggregate(shuffled, "analysis").to_json()
        assert a == b

    @given(st.lists(st.floats(min_value=0, max_value=1e4), min_size=1, max_size=50))
    def test_median_matches_oracle(self, values):
        assert median_lower_middle(values) == median_oracle(values)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            aggregate([], "analysis")


@pytest.fixture(scope="module")
def fixture_engine():
    catalog = ingest_catalog(fixtures.catalog_manifest())
    embedder = HashedNgramEmbedder()
    return BenchEngine(
        catalog=catalog,
        index=build_index_for_catalog(catalog, embedder),
        embedder=embedder,
        gateway=Gateway(
            ScriptedProvider.from_file(fixtures.provider_script()),
            PricingTable.load(),
            sleep=lambda s: None,
        ),
        retrieval_config=RetrievalConfig(max_tool_rounds=6),
        analysis_config=AnalysisConfig(max_steps=20),
    )


@pytest.fixture(scope="module")
def fixture_questions():
    _name, templates = load_suite(fixtures.suite_path())
    return expand(templates)


class TestFixtureRuns:
    def test_retrieval_stage_writes_records(self, fixture_engine, fixture_questions, tmp_path):
        records = run_retrieval(fixture_questions, fixture_engine, "gpt-4.1", tmp_path)
        assert len(records) == 12
        stored, meta = read_records(tmp_path, "retrieval")
        assert [r["question_id"] for r in stored] == [q.id for q in fixture_questions]
        assert meta["model_id"] == "gpt-4.1"

    def test_analysis_stage_runs_positives_only(self, fixture_engine, fixture_questions, tmp_path):
        records = run_analysis(fixture_questions, fixture_engine, "gpt-4.1", tmp_path)
        assert len(records) == 9
        assert all(not r["negative"] for r in records)

    def test_reformulations_within_budget(self, fixture_engine, fixture_questions):
        records = run_retrieval(fixture_questions, fixture_engine, "gpt-4.1")
        assert all(len(r["reformulations"]) <= 3 for r in records)

    def test_retrieved_ids_exist_in_catalog(self, fixture_engine, fixture_questions):
        records = run_retrieval(fixture_questions, fixture_engine, "gpt-4.1")
        for record in records:
            for dataset_id in record["retrieved"]:
                assert dataset_id in fixture_engine.catalog

    def test_cost_equals_estimate_cost(self, fixture_engine, fixture_questions):
        from opendataqa.gateway import Usage, estimate_cost

        records = run_retrieval(fixture_questions, fixture_engine, "gpt-4.1")
        pricing = fixture_engine.gateway.pricing.get("gpt-4.1")
        for record in records:
            usage = Usage(**record["usage"])
            assert record["cost_usd"] == estimate_cost(usage, pricing)

    def test_engine_failure_marks_question_and_run_continues(self, fixture_engine, fixture_questions):
        from opendataqa.bench.suite import BenchQuestion

        unknown = BenchQuestion(
            id="alien#0",
            template_id="alien",
            text="question with no scripted scenario at all",
            relevant_dataset_ids=("fountains",),
            ground_truth="42",
            category="misc",
            required_ops=(),
            negative=False,
        )
        records = run_retrieval([unknown, fixture_questions[0]], fixture_engine, "gpt-4.1")
        assert records[0]["failed"] is True
        assert records[0]["recall"] == 0.0
        assert records[1]["failed"] is False  # the run continued

    def test_workers_pool_gives_same_records(self, fixture_questions):
        def engine(workers):
            catalog = ingest_catalog(fixtures.catalog_manifest())
            embedder = HashedNgramEmbedder()
            return BenchEngine(
                catalog=catalog,
                index=build_index_for_catalog(catalog, embedder),
                embedder=embedder,
                gateway=Gateway(
                    ScriptedProvider.from_file(fixtures.provider_script()),
                    PricingTable.load(),
                    sleep=lambda s: None,
                ),
                retrieval_config=RetrievalConfig(max_tool_rounds=6),
                analysis_config=AnalysisConfig(max_steps=20),
                workers=workers,
            )

        def strip(records):
            return [{k: v for k, v in r.items() if k != "latency_s"} for r in records]

        serial = strip(run_retrieval(fixture_questions, engine(1), "gpt-4.1"))
        parallel = strip(run_retrieval(fixture_questions, engine(4), "gpt-4.1"))
        assert serial == parallel


class TestReportRendering:
    def make_report(self):
        return aggregate(
            [
                {
                    "question_id": "q0",
                    "negative": False,
                    "recall": 1.0,
                    "precision": 0.5,
                    "answerability_correct": True,
                    "latency_s": 1.0,
                    "usage": {"input_tokens": 10, "output_tokens": 5, "reasoning_tokens": 0},
                    "cost_usd": 0.001,
                }
            ],
            "retrieval",
            "gpt-4.1",
        )

    def test_json_round_trips(self):
        report = self.make_report()
        doc = json.loads(render_report([report], "json"))
        assert doc[0]["recall_mean"] == 1.0
        assert doc[0]["model_id"] == "gpt-4.1"

    def test_markdown_one_row_per_model(self):
        report_a = self.make_report()
        import dataclasses

        report_b = dataclasses.replace(report_a, model_id="gpt-4o")
        md = render_report([report_a, report_b], "md")
        rows = [line for line in md.splitlines() if line.startswith("| gpt")]
        assert len(rows) == 2

    def test_plot_spec_validates(self):
        doc = json.loads(render_report([self.make_report()], "plot_spec"))
        assert doc["kind"] == "plot_spec"
        from opendataqa.interpreter import validate_artifact

        validate_artifact("plot_spec", doc["payload"])
