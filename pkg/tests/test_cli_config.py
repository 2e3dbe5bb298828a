from __future__ import annotations

import json

import pytest

from opendataqa import fixtures
from opendataqa.cli import main
from opendataqa.config import Config
from opendataqa.errors import ConfigError


class TestConfig:
    def test_parse_key_values_and_comments(self, tmp_path):
        path = tmp_path / "app.conf"
        path.write_text(
            "# comment\nmodel = gpt-4.1-mini\n\nmax_steps = 7\ntop_k=4\n", "utf-8"
        )
        config = Config.from_file(path)
        assert config.get("model") == "gpt-4.1-mini"
        assert config.get_int("max_steps", 20) == 7
        assert config.get_int("top_k", 10) == 4
        assert config.get("missing", "dflt") == "dflt"

    def test_bad_line_rejected(self, tmp_path):
        path = tmp_path / "bad.conf"
        path.write_text("just words\n", "utf-8")
        with pytest.raises(ConfigError):
            Config.from_file(path)

    def test_bad_int_rejected(self, tmp_path):
        path = tmp_path / "bad.conf"
        path.write_text("max_steps = banana\n", "utf-8")
        with pytest.raises(ConfigError):
            Config.from_file(path).get_int("max_steps", 1)

    def test_relative_paths_resolve_against_config_dir(self, tmp_path):
        path = tmp_path / "app.conf"
        path.write_text("catalog_manifest = data/manifest.json\n", "utf-8")
        config = Config.from_file(path)
        assert config.get_path("catalog_manifest") == tmp_path / "data" / "manifest.json"

    def test_hash_stable_and_order_independent(self, tmp_path):
        a = tmp_path / "a.conf"
        b = tmp_path / "b.conf"
        a.write_text("x = 1\ny = 2\n", "utf-8")
        b.write_text("y = 2\nx = 1\n", "utf-8")
        assert Config.from_file(a).hash() == Config.from_file(b).hash()


class TestCli:
    def test_ingest_fixture(self, capsys):
        assert main(["ingest"]) == 0
        out = capsys.readouterr().out
        assert "catalog ok: 12 datasets" in out

    def test_ingest_missing_manifest_fails_cleanly(self, capsys):
        assert main(["ingest", "--manifest", "/nope/manifest.json"]) == 2
        assert "error:" in capsys.readouterr().err

    def test_index_fixture(self, capsys):
        assert main(["index"]) == 0
        assert "indexed 12 documents" in capsys.readouterr().out

    def test_ask_prints_event_jsonl(self, capsys, tmp_path):
        config = tmp_path / "app.conf"
        config.write_text(f"data_dir = {tmp_path / 'data'}\n", "utf-8")
        code = main(
            ["ask", "How many public fountains are there in Lindenstadt?", "--config", str(config)]
        )
        assert code == 0
        lines = [json.loads(l) for l in capsys.readouterr().out.strip().splitlines()]
        assert lines[0]["type"] == "reformulation"
        assert lines[-1]["type"] == "final"
        assert "14" in lines[-1]["payload"]["text"]

    def test_bench_run_and_report(self, capsys, tmp_path):
        out_dir = tmp_path / "records"
        code = main(
            [
                "bench", "run",
                "--suite", str(fixtures.suite_path()),
                "--stage", "both",
                "--model", "gpt-4.1",
                "--out", str(out_dir),
            ]
        )
        assert code == 0
        assert (out_dir / "retrieval_records.jsonl").exists()
        assert (out_dir / "analysis_records.jsonl").exists()
        capsys.readouterr()

        assert main(["bench", "report", "--in", str(out_dir), "--format", "json"]) == 0
        doc = json.loads(capsys.readouterr().out)
        stages = {entry["stage"] for entry in doc}
        assert stages == {"retrieval", "analysis"}

    def test_bench_report_empty_dir(self, tmp_path, capsys):
        assert main(["bench", "report", "--in", str(tmp_path)]) == 1
