"""Assembly: build catalog, index, gateway, and orchestrator from a Config."""
from __future__ import annotations

import logging
from pathlib import Path

from . import embedding, fixtures
from .analysis import AnalysisConfig
from .bench.runner import BenchEngine
from .catalog import Catalog, ingest_catalog
from .config import Config
from .errors import ConfigError
from .gateway import Gateway, HttpChatProvider, PricingTable, ScriptedProvider
from .orchestrator import Orchestrator
from .retrieval import RetrievalConfig, build_index_for_catalog

log = logging.getLogger(__name__)


def build_catalog(config: Config) -> Catalog:
    manifest = config.get_path("catalog_manifest", fixtures.catalog_manifest())
    return ingest_catalog(manifest)


def build_embedder(config: Config) -> embedding.Embedder:
    kind = config.get("embedder", "local")
    if kind == "local":
        embedder: embedding.Embedder = embedding.HashedNgramEmbedder()
    elif kind == "remote":
        endpoint = config.get("embedding_endpoint")
        if not endpoint:
            raise ConfigError("embedder = remote needs embedding_endpoint")
        embedder = embedding.RemoteEmbedder(
            endpoint=endpoint,
            model=config.get("embedding_model", "text-embedding-3-large"),
            api_key_env=config.get("embedding_api_key_env", "OPENDATAQA_API_KEY"),
        )
    else:
        raise ConfigError(f"unknown embedder {kind!r}")
    cache_dir = config.get_path("embedding_cache_dir")
    if cache_dir:
        embedder = embedding.CachingEmbedder(embedder, embedding.EmbeddingCache(cache_dir))
    return embedder


def build_gateway(config: Config) -> Gateway:
    kind = config.get("provider", "scripted")
    if kind == "scripted":
        script = config.get_path("script_path", fixtures.provider_script())
        provider = ScriptedProvider.from_file(script)
    elif kind == "http":
        endpoint = config.get("chat_endpoint")
        if not endpoint:
            raise ConfigError("provider = http needs chat_endpoint")
        provider = HttpChatProvider(
            endpoint=endpoint,
            api_key_env=config.get("chat_api_key_env", "OPENDATAQA_API_KEY"),
        )
    else:
        raise ConfigError(f"unknown provider {kind!r}")
    pricing = PricingTable.load(config.get_path("pricing_path"))
    return Gateway(provider, pricing)


def retrieval_config(config: Config) -> RetrievalConfig:
    return RetrievalConfig(
        model=config.get("model", "gpt-4.1"),
        max_subqueries=config.get_int("max_subqueries", 3),
        top_k=config.get_int("top_k", 10),
        snippet_max_chars=config.get_int("snippet_max_chars", 2000),
        max_tool_rounds=config.get_int("max_tool_rounds", 8),
        language=config.get("language"),
    )


def analysis_config(config: Config) -> AnalysisConfig:
    return AnalysisConfig(
        model=config.get("model", "gpt-4.1"),
        max_steps=config.get_int("max_steps", 20),
        sample_rows=config.get_int("sample_rows", 5),
    )


def build_orchestrator(config: Config) -> Orchestrator:
    catalog = build_catalog(config)
    embedder = build_embedder(config)
    log.info("indexing %d metadata documents", len(catalog))
    index = build_index_for_catalog(catalog, embedder)
    return Orchestrator(
        catalog,
        index,
        embedder,
        build_gateway(config),
        retrieval_config=retrieval_config(config),
        analysis_config=analysis_config(config),
        data_dir=config.get_path("data_dir", Path(".opendataqa_data")),
        router_model=config.get("router_model"),
    )


def build_bench_engine(config: Config) -> BenchEngine:
    catalog = build_catalog(config)
    embedder = build_embedder(config)
    return BenchEngine(
        catalog=catalog,
        index=build_index_for_catalog(catalog, embedder),
        embedder=embedder,
        gateway=build_gateway(config),
        retrieval_config=retrieval_config(config),
        analysis_config=analysis_config(config),
        judge_mode=config.get("judge_mode", "deterministic"),
        judge_model=config.get("judge_model", "gpt-4o"),
        workers=config.get_int("workers", 1),
    )
