"""Dense-vector embedding of catalog documents and queries, plus exact
cosine-similarity nearest-neighbor search.

The index is brute force on purpose: at catalog scale (hundreds of
documents) exactness and auditability matter more than sub-millisecond
lookups.  Hits are ordered by descending score with ties broken by
ascending dataset id, which makes results independent of insertion order.
"""
from __future__ import annotations

import hashlib
import logging
import os
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from .errors import DimMismatch, EmptyIndex, EmptyText, ProviderUnavailable, ZeroVector

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SearchHit:
    dataset_id: str
    score: float


class Embedder(Protocol):
    provider_id: str
    dim: int

    def embed(self, text: str) -> np.ndarray: ...


def embed(provider: Embedder, text: str) -> np.ndarray:
    """Embed one text with a provider; empty input is rejected."""
    if not text or not text.strip():
        raise EmptyText()
    vec = np.asarray(provider.embed(text), dtype=np.float32)
    if vec.ndim != 1 or vec.shape[0] != provider.dim:
        raise ProviderUnavailable(
            f"provider {provider.provider_id} returned a vector of dim "
            f"{vec.shape} instead of {provider.dim}"
        )
    if not np.all(np.isfinite(vec)):
        raise ProviderUnavailable(f"provider {provider.provider_id} returned non-finite values")
    return vec


def cosine(a: Sequence[float] | np.ndarray, b: Sequence[float] | np.ndarray) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimMismatch(int(a.shape[0]), int(b.shape[0]))
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ZeroVector()
    return float(np.dot(a, b) / (na * nb))


# ---------------------------------------------------------------------------
# Local deterministic embedder (offline tests and demos)
# ---------------------------------------------------------------------------

class HashedNgramEmbedder:
    """256-dim hashed unigram+bigram bag of words, L2-normalized.

    Deterministic across runs and platforms (blake2 token hashing); good
    enough to exercise retrieval plumbing offline, not a semantic model.
    """

    provider_id = "local-hashed-ngram"
    dim = 256

    def _tokens(self, text: str) -> list[str]:
        tokens: list[str] = []
        word = []
        for ch in text.lower():
            if ch.isalnum():
                word.append(ch)
            elif word:
                tokens.append("".join(word))
                word = []
        if word:
            tokens.append("".join(word))
        if not tokens:
            tokens = [text.strip().lower() or text]
        return tokens

    def _slot(self, token: str) -> int:
        digest = hashlib.blake2s(token.encode("utf-8"), digest_size=4).digest()
        return int.from_bytes(digest, "little") % self.dim

    def embed(self, text: str) -> np.ndarray:
        counts = np.zeros(self.dim, dtype=np.float32)
        tokens = self._tokens(text)
        for tok in tokens:
            counts[self._slot(tok)] += 1.0
        for a, b in zip(tokens, tokens[1:]):
            counts[self._slot(f"{a} {b}")] += 1.0
        norm = float(np.linalg.norm(counts))
        return counts / norm


# ---------------------------------------------------------------------------
# Remote embedder (standard embeddings HTTPS+JSON endpoint)
# ---------------------------------------------------------------------------

class RemoteEmbedder:
    """Client for the common embeddings endpoint shape.

    POST {endpoint} with {"model": ..., "input": [text]} and a bearer token
    taken from the configured environment variable.
    """

    def __init__(self, endpoint: str, model: str, api_key_env: str, dim: int = 3072,
                 timeout: float = 60.0):
        self.provider_id = f"remote:{model}"
        self.endpoint = endpoint
        self.model = model
        self.api_key_env = api_key_env
        self.dim = dim
        self.timeout = timeout

    def embed(self, text: str) -> np.ndarray:
        import requests

        api_key = os.environ.get(self.api_key_env, "")
        if not api_key:
            raise ProviderUnavailable(f"environment variable {self.api_key_env} is not set")
        try:
            resp = requests.post(
                self.endpoint,
                json={"model": self.model, "input": [text]},
                headers={"Authorization": f"Bearer {api_key}"},
                timeout=self.timeout,
            )
        except requests.RequestException as exc:
            raise ProviderUnavailable(f"embeddings endpoint unreachable: {exc}") from None
        if resp.status_code != 200:
            raise ProviderUnavailable(f"embeddings endpoint returned {resp.status_code}")
        try:
            data = resp.json()["data"][0]["embedding"]
        except (KeyError, IndexError, ValueError) as exc:
            raise ProviderUnavailable(f"malformed embeddings response: {exc}") from None
        vec = np.asarray(data, dtype=np.float32)
        self.dim = int(vec.shape[0])
        return vec


# ---------------------------------------------------------------------------
# Disk cache
# ---------------------------------------------------------------------------

class EmbeddingCache:
    """Per-provider directory of vectors keyed by content hash.

    File format: little-endian uint32 dim followed by dim little-endian
    float32 values.  Re-runs over a large catalog never re-bill the
    provider.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def _path(self, provider_id: str, text: str) -> Path:
        digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
        safe_provider = provider_id.replace(":", "_").replace("/", "_")
        return self.root / safe_provider / f"{digest}.vec"

    def get(self, provider_id: str, text: str) -> np.ndarray | None:
        path = self._path(provider_id, text)
        if not path.is_file():
            return None
        blob = path.read_bytes()
        (dim,) = struct.unpack("<I", blob[:4])
        vec = np.frombuffer(blob[4:], dtype="<f4")
        if vec.shape[0] != dim:
            log.warning("corrupt cache entry %s, ignoring", path)
            return None
        return vec.astype(np.float32)

    def put(self, provider_id: str, text: str, vec: np.ndarray) -> None:
        path = self._path(provider_id, text)
        path.parent.mkdir(parents=True, exist_ok=True)
        blob = struct.pack("<I", vec.shape[0]) + np.asarray(vec, dtype="<f4").tobytes()
        path.write_bytes(blob)


class CachingEmbedder:
    """Wrap any embedder with the disk cache."""

    def __init__(self, inner: Embedder, cache: EmbeddingCache):
        self.inner = inner
        self.cache = cache

    @property
    def provider_id(self) -> str:
        return self.inner.provider_id

    @property
    def dim(self) -> int:
        return self.inner.dim

    def embed(self, text: str) -> np.ndarray:
        hit = self.cache.get(self.inner.provider_id, text)
        if hit is not None:
            return hit
        vec = self.inner.embed(text)
        self.cache.put(self.inner.provider_id, text, np.asarray(vec, dtype=np.float32))
        return vec


# ---------------------------------------------------------------------------
# Index
# ---------------------------------------------------------------------------

class Index:
    """Exact cosine nearest-neighbor index over embedded documents."""

    def __init__(self):
        self._ids: list[str] = []
        self._vectors: list[np.ndarray] = []
        self._matrix: np.ndarray | None = None
        self._dim: int | None = None

    def __len__(self) -> int:
        return len(self._ids)

    def __contains__(self, dataset_id: str) -> bool:
        return dataset_id in self._ids

    def add(self, dataset_id: str, vector: np.ndarray) -> None:
        # float64 internally so scores agree with a sequential-sum oracle
        vec = np.asarray(vector, dtype=np.float64)
        if self._dim is None:
            self._dim = int(vec.shape[0])
        elif vec.shape[0] != self._dim:
            raise DimMismatch(self._dim, int(vec.shape[0]))
        norm = float(np.linalg.norm(vec))
        if norm == 0.0 or not np.all(np.isfinite(vec)):
            raise ZeroVector()
        if dataset_id in self._ids:
            raise ValueError(f"dataset {dataset_id!r} already indexed")
        self._ids.append(dataset_id)
        self._vectors.append(vec / norm)
        self._matrix = None

    def _normalized_matrix(self) -> np.ndarray:
        if self._matrix is None:
            self._matrix = np.vstack(self._vectors)
        return self._matrix

    def knn(self, query: np.ndarray, k: int) -> list[SearchHit]:
        """Top min(k, n) hits, exact, ordered (-score, dataset_id)."""
        if len(self._ids) == 0:
            raise EmptyIndex()
        if k < 1:
            raise ValueError("k must be >= 1")
        q = np.asarray(query, dtype=np.float64)
        if self._dim is not None and q.shape[0] != self._dim:
            raise DimMismatch(self._dim, int(q.shape[0]))
        qnorm = float(np.linalg.norm(q))
        if qnorm == 0.0:
            raise ZeroVector()
        scores = self._normalized_matrix() @ (q / qnorm)
        order = sorted(range(len(self._ids)), key=lambda i: (-scores[i], self._ids[i]))
        return [
            SearchHit(self._ids[i], float(scores[i]))
            for i in order[: min(k, len(self._ids))]
        ]


def build_index(
    texts_by_id: dict[str, str],
    embedder: Embedder,
) -> Index:
    """Embed every document text and build the search index."""
    index = Index()
    for dataset_id in texts_by_id:
        index.add(dataset_id, embed(embedder, texts_by_id[dataset_id]))
    return index
