"""Flat key-value config files.

Format: one `key = value` per line, `#` starts a comment, blank lines
ignored.  Values stay strings; typed accessors coerce on read.  Secrets
never live in the file, only names of environment variables do.

Recognized keys (all optional; defaults in parentheses):

  provider            scripted | http (scripted)
  script_path         scripted-provider JSON (bundled fixture script)
  chat_endpoint       chat completions URL (https, for provider=http)
  chat_api_key_env    env var holding the chat API key (OPENDATAQA_API_KEY)
  model               chat model id (gpt-4.1)
  router_model        follow-up router model (= model)
  judge_model         LLM-judge model (gpt-4o)
  judge_mode          deterministic | llm (deterministic)
  embedder            local | remote (local)
  embedding_endpoint  embeddings URL (for embedder=remote)
  embedding_api_key_env  env var for the embeddings key (OPENDATAQA_API_KEY)
  embedding_model     remote embedding model (text-embedding-3-large)
  embedding_cache_dir disk cache for vectors (no cache)
  catalog_manifest    dataset manifest path (bundled fixture catalog)
  data_dir            conversation/audit storage (.opendataqa_data)
  host, port          HTTP bind (127.0.0.1, 8080)
  language            reformulation language (catalog language)
  max_subqueries (3), top_k (10), snippet_max_chars (2000),
  max_tool_rounds (8), max_steps (20), sample_rows (5)
  max_ops (10000000), max_collection_len (1000000), max_output_chars (20000)
  pricing_path        override for the bundled pricing table
  workers             bench worker pool size (1)
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError


@dataclass
class Config:
    values: dict[str, str] = field(default_factory=dict)
    source: str = "<defaults>"

    @classmethod
    def from_file(cls, path: str | Path) -> "Config":
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        values: dict[str, str] = {}
        for lineno, raw in enumerate(path.read_text("utf-8").splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, value = line.split("=", 1)
            key = key.strip()
            if not key:
                raise ConfigError(f"{path}:{lineno}: empty key")
            values[key] = value.strip()
        return cls(values=values, source=str(path))

    def get(self, key: str, default: str | None = None) -> str | None:
        return self.values.get(key, default)

    def get_int(self, key: str, default: int) -> int:
        raw = self.values.get(key)
        if raw is None:
            return default
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{self.source}: {key} must be an integer, got {raw!r}") from None

    def get_float(self, key: str, default: float) -> float:
        raw = self.values.get(key)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"{self.source}: {key} must be a number, got {raw!r}") from None

    def get_path(self, key: str, default: Path | None = None) -> Path | None:
        raw = self.values.get(key)
        if raw is None:
            return default
        base = Path(self.source).parent if self.source != "<defaults>" else Path.cwd()
        p = Path(raw)
        return p if p.is_absolute() else (base / p)

    def hash(self) -> str:
        canonical = "\n".join(f"{k}={self.values[k]}" for k in sorted(self.values))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]
