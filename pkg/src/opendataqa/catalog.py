"""Dataset catalog: metadata ingestion, validation, and payload loading.

A catalog is built from a JSON manifest listing one metadata document and
one payload file per dataset.  Metadata documents are single JSON objects;
payloads are CSV (tabular) or GeoJSON (geospatial).  The catalog is
immutable after ingest.
"""
from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Iterator

from . import geometry
from .errors import (
    DuplicateId,
    ManifestNotFound,
    PayloadTypeMismatch,
    PayloadUnreadable,
    SchemaViolation,
    UnknownDataset,
)

log = logging.getLogger(__name__)

FIELD_TYPES = ("integer", "real", "text", "date", "boolean", "geometry")


@dataclass(frozen=True)
class FieldDescriptor:
    name: str
    type_hint: str
    description: str = ""


@dataclass(frozen=True)
class DatasetMetadata:
    id: str
    title: str
    summary: str
    categories: tuple[str, ...]
    fields: tuple[FieldDescriptor, ...]
    publication_date: date
    source_url: str
    payload_locator: str
    language: str


@dataclass
class DatasetPayload:
    columns: list[FieldDescriptor]
    rows: list[tuple]
    crs: str | None = None

    def __len__(self) -> int:
        return len(self.rows)

    def column_names(self) -> list[str]:
        return [c.name for c in self.columns]


class Catalog:
    """Validated, immutable set of dataset metadata documents."""

    def __init__(self, docs: list[DatasetMetadata]):
        self._by_id: dict[str, DatasetMetadata] = {}
        for doc in docs:
            if doc.id in self._by_id:
                raise DuplicateId(doc.id)
            self._by_id[doc.id] = doc

    def __len__(self) -> int:
        return len(self._by_id)

    def __iter__(self) -> Iterator[DatasetMetadata]:
        return iter(self._by_id.values())

    def __contains__(self, dataset_id: str) -> bool:
        return dataset_id in self._by_id

    def ids(self) -> list[str]:
        return list(self._by_id)

    def get(self, dataset_id: str) -> DatasetMetadata:
        try:
            return self._by_id[dataset_id]
        except KeyError:
            raise UnknownDataset(dataset_id) from None

    @property
    def language(self) -> str:
        """Majority language tag of the catalog (ties broken alphabetically)."""
        counts: dict[str, int] = {}
        for doc in self:
            counts[doc.language] = counts.get(doc.language, 0) + 1
        if not counts:
            return "en"
        return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0][0]


# ---------------------------------------------------------------------------
# Metadata validation
# ---------------------------------------------------------------------------

def _require_str(doc_id: str, obj: dict, key: str, pointer: str) -> str:
    value = obj.get(key)
    if not isinstance(value, str) or not value.strip():
        raise SchemaViolation(doc_id, f"{pointer}/{key}", "must be a non-empty string")
    return value


def parse_metadata(raw: dict, payload_locator: str, source: str = "<memory>") -> DatasetMetadata:
    if not isinstance(raw, dict):
        raise SchemaViolation("<unknown>", "", f"metadata document {source} is not a JSON object")
    doc_id = raw.get("id")
    if not isinstance(doc_id, str) or not doc_id.strip():
        raise SchemaViolation("<unknown>", "/id", "must be a non-empty string")

    title = _require_str(doc_id, raw, "title", "")
    summary = _require_str(doc_id, raw, "summary", "")
    source_url = _require_str(doc_id, raw, "source_url", "")
    language = _require_str(doc_id, raw, "language", "")

    categories = raw.get("categories", [])
    if not isinstance(categories, list) or not all(isinstance(c, str) for c in categories):
        raise SchemaViolation(doc_id, "/categories", "must be an array of strings")

    raw_fields = raw.get("fields", [])
    if not isinstance(raw_fields, list):
        raise SchemaViolation(doc_id, "/fields", "must be an array")
    fields: list[FieldDescriptor] = []
    seen_names: set[str] = set()
    for i, rf in enumerate(raw_fields):
        if not isinstance(rf, dict):
            raise SchemaViolation(doc_id, f"/fields/{i}", "must be an object")
        name = rf.get("name")
        if not isinstance(name, str) or not name:
            raise SchemaViolation(doc_id, f"/fields/{i}/name", "must be a non-empty string")
        if name in seen_names:
            raise SchemaViolation(doc_id, f"/fields/{i}/name", f"duplicate field name {name!r}")
        seen_names.add(name)
        type_hint = rf.get("type_hint")
        if type_hint not in FIELD_TYPES:
            raise SchemaViolation(
                doc_id, f"/fields/{i}/type_hint", f"must be one of {', '.join(FIELD_TYPES)}"
            )
        fields.append(FieldDescriptor(name, type_hint, str(rf.get("description", ""))))

    raw_date = raw.get("publication_date")
    if not isinstance(raw_date, str):
        raise SchemaViolation(doc_id, "/publication_date", "must be an ISO-8601 date string")
    try:
        pub_date = date.fromisoformat(raw_date)
    except ValueError:
        raise SchemaViolation(
            doc_id, "/publication_date", f"{raw_date!r} is not an ISO-8601 date"
        ) from None

    return DatasetMetadata(
        id=doc_id,
        title=title,
        summary=summary,
        categories=tuple(categories),
        fields=tuple(fields),
        publication_date=pub_date,
        source_url=source_url,
        payload_locator=payload_locator,
        language=language,
    )


def metadata_to_json(meta: DatasetMetadata) -> dict:
    return {
        "id": meta.id,
        "title": meta.title,
        "summary": meta.summary,
        "categories": list(meta.categories),
        "fields": [
            {"name": f.name, "type_hint": f.type_hint, "description": f.description}
            for f in meta.fields
        ],
        "publication_date": meta.publication_date.isoformat(),
        "source_url": meta.source_url,
        "language": meta.language,
    }


# ---------------------------------------------------------------------------
# Ingest / serialize
# ---------------------------------------------------------------------------

def ingest_catalog(manifest_path: str | Path) -> Catalog:
    """Load and validate every metadata document listed in a manifest.

    The manifest is a JSON array of {"metadata": <path>, "payload": <path>}
    entries; relative paths are resolved against the manifest directory.
    """
    manifest_path = Path(manifest_path)
    if not manifest_path.is_file():
        raise ManifestNotFound(str(manifest_path))
    base = manifest_path.parent
    try:
        entries = json.loads(manifest_path.read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaViolation("<manifest>", "", f"manifest is not valid JSON: {exc}") from None
    if not isinstance(entries, list):
        raise SchemaViolation("<manifest>", "", "manifest must be a JSON array")

    docs: list[DatasetMetadata] = []
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict) or "metadata" not in entry:
            raise SchemaViolation("<manifest>", f"/{i}", "entry needs a 'metadata' path")
        meta_path = (base / entry["metadata"]).resolve()
        if not meta_path.is_file():
            raise SchemaViolation("<manifest>", f"/{i}/metadata", f"file not found: {meta_path}")
        payload_raw = entry.get("payload", "")
        payload_locator = str((base / payload_raw).resolve()) if payload_raw else ""
        try:
            raw = json.loads(meta_path.read_text("utf-8"))
        except json.JSONDecodeError as exc:
            raise SchemaViolation("<unknown>", "", f"{meta_path.name}: invalid JSON: {exc}") from None
        docs.append(parse_metadata(raw, payload_locator, source=str(meta_path)))
    return Catalog(docs)


def serialize_catalog(catalog: Catalog, out_dir: str | Path) -> Path:
    """Write a catalog back to disk; returns the new manifest path.

    Payload files are referenced in place, so ingest(serialize(ingest(M)))
    reproduces ingest(M).
    """
    out_dir = Path(out_dir)
    meta_dir = out_dir / "metadata"
    meta_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for meta in catalog:
        name = f"{meta.id}.json"
        (meta_dir / name).write_text(
            json.dumps(metadata_to_json(meta), ensure_ascii=False, indent=2), "utf-8"
        )
        entry = {"metadata": f"metadata/{name}"}
        if meta.payload_locator:
            entry["payload"] = meta.payload_locator
        entries.append(entry)
    manifest = out_dir / "manifest.json"
    manifest.write_text(json.dumps(entries, indent=2), "utf-8")
    return manifest


# ---------------------------------------------------------------------------
# Embedding text
# ---------------------------------------------------------------------------

def embedding_text(meta: DatasetMetadata) -> str:
    """Canonical text for one document, fed to the embedding model.

    Pure function of the metadata: labeled lines, no clock, no randomness.
    """
    lines = [
        f"TITLE: {meta.title}",
        f"SUMMARY: {meta.summary}",
        f"CATEGORIES: {', '.join(meta.categories)}",
        "FIELDS:",
    ]
    for f in meta.fields:
        lines.append(f"- {f.name} ({f.type_hint}): {f.description}")
    lines.append(f"PUBLISHED: {meta.publication_date.isoformat()}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Payload loading
# ---------------------------------------------------------------------------

_BOOL_VALUES = {
    "true": True, "false": False, "1": True, "0": False,
    "yes": True, "no": False, "ja": True, "nein": False,
}


def _parse_cell(value, descriptor: FieldDescriptor, row_index: int):
    if value is None or (isinstance(value, str) and value == ""):
        return None
    kind = descriptor.type_hint
    try:
        if kind == "integer":
            if isinstance(value, bool):
                raise ValueError
            if isinstance(value, float):
                if not value.is_integer():
                    raise ValueError
                return int(value)
            return int(str(value).strip())
        if kind == "real":
            if isinstance(value, bool):
                raise ValueError
            return float(value)
        if kind == "text":
            return str(value)
        if kind == "date":
            return date.fromisoformat(str(value).strip())
        if kind == "boolean":
            if isinstance(value, bool):
                return value
            key = str(value).strip().lower()
            if key not in _BOOL_VALUES:
                raise ValueError
            return _BOOL_VALUES[key]
    except (ValueError, TypeError):
        raise PayloadTypeMismatch(descriptor.name, row_index, str(value)) from None
    raise PayloadTypeMismatch(descriptor.name, row_index, str(value))


def _load_csv(path: Path, meta: DatasetMetadata) -> DatasetPayload:
    columns = [f for f in meta.fields]
    geo_cols = [c for c in columns if c.type_hint == "geometry"]
    if geo_cols:
        raise PayloadUnreadable(
            meta.id, f"CSV payloads cannot carry geometry column {geo_cols[0].name!r}; use GeoJSON"
        )
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise PayloadUnreadable(meta.id, "CSV file has no header row")
        missing = [c.name for c in columns if c.name not in reader.fieldnames]
        if missing:
            raise PayloadUnreadable(meta.id, f"CSV header missing declared columns: {missing}")
        rows = []
        for i, record in enumerate(reader):
            rows.append(tuple(_parse_cell(record.get(c.name), c, i) for c in columns))
    return DatasetPayload(columns=columns, rows=rows, crs=None)


def _geojson_crs(doc: dict, dataset_id: str) -> str:
    crs_obj = doc.get("crs")
    if isinstance(crs_obj, dict):
        name = (crs_obj.get("properties") or {}).get("name")
        if isinstance(name, str) and name:
            # normalize urn:ogc:def:crs:EPSG::2056 style names
            if "EPSG" in name.upper() and "::" in name:
                return "EPSG:" + name.rsplit(":", 1)[-1]
            return name
    log.warning("dataset %s: GeoJSON without CRS, assuming %s", dataset_id, geometry.DEFAULT_CRS)
    return geometry.DEFAULT_CRS


def _load_geojson(path: Path, meta: DatasetMetadata) -> DatasetPayload:
    try:
        doc = json.loads(path.read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise PayloadUnreadable(meta.id, f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("type") != "FeatureCollection":
        raise PayloadUnreadable(meta.id, "expected a GeoJSON FeatureCollection")
    crs = _geojson_crs(doc, meta.id)
    columns = list(meta.fields)
    geo_cols = [c for c in columns if c.type_hint == "geometry"]
    if len(geo_cols) != 1:
        raise PayloadUnreadable(meta.id, "GeoJSON payloads need exactly one geometry column")
    geo_col = geo_cols[0]
    rows = []
    for i, feat in enumerate(doc.get("features", [])):
        if not isinstance(feat, dict) or feat.get("type") != "Feature":
            raise PayloadUnreadable(meta.id, f"features[{i}] is not a Feature")
        props = feat.get("properties") or {}
        try:
            geom = geometry.from_geojson(feat.get("geometry") or {}, crs=crs)
        except geometry.GeometryError as exc:
            raise PayloadUnreadable(meta.id, f"features[{i}]: {exc}") from None
        row = []
        for c in columns:
            if c.name == geo_col.name:
                row.append(geom)
            else:
                row.append(_parse_cell(props.get(c.name), c, i))
        rows.append(tuple(row))
    return DatasetPayload(columns=columns, rows=rows, crs=crs)


def load_payload(catalog: Catalog, dataset_id: str) -> DatasetPayload:
    """Parse the payload of one dataset into typed columns."""
    meta = catalog.get(dataset_id)
    if not meta.payload_locator:
        raise PayloadUnreadable(dataset_id, "no payload file recorded in the manifest")
    path = Path(meta.payload_locator)
    if not path.is_file():
        raise PayloadUnreadable(dataset_id, f"payload file not found: {path}")
    suffix = path.suffix.lower()
    if suffix == ".csv":
        return _load_csv(path, meta)
    if suffix in (".geojson", ".json"):
        return _load_geojson(path, meta)
    raise PayloadUnreadable(dataset_id, f"unsupported payload format: {suffix!r}")
