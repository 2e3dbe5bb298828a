"""Multimodal result artifacts emitted by analysis code.

Four kinds: text (plain string), table (columns + rows), plot_spec
(declarative chart description), map_spec (base map + GeoJSON layers).
Payloads are validated against the JSON schema files shipped under
assets/schemas/.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .. import geometry, jsonschema_lite
from .values import Frame

ARTIFACT_KINDS = ("text", "table", "plot_spec", "map_spec")


class ArtifactError(Exception):
    pass


@dataclass(frozen=True)
class Artifact:
    kind: str
    payload: object  # str for text, dict for the structured kinds

    def to_json(self) -> dict:
        return {"kind": self.kind, "payload": self.payload}


@lru_cache(maxsize=None)
def load_schema(kind: str) -> dict:
    raw = resources.files("opendataqa.assets.schemas").joinpath(f"{kind}.schema.json")
    return json.loads(raw.read_text("utf-8"))


def validate_artifact(kind: str, payload) -> None:
    if kind not in ARTIFACT_KINDS:
        raise ArtifactError(f"unknown artifact kind {kind!r}; expected one of {ARTIFACT_KINDS}")
    if kind == "text":
        if not isinstance(payload, str):
            raise ArtifactError("text artifact payload must be a string")
        return
    err = jsonschema_lite.check(payload, load_schema(kind))
    if err:
        raise ArtifactError(f"{kind} artifact invalid: {err}")


def make_artifact(kind: str, payload) -> Artifact:
    validate_artifact(kind, payload)
    return Artifact(kind, payload)


# ---------------------------------------------------------------------------
# Frame conversions
# ---------------------------------------------------------------------------

def _json_cell(value):
    if isinstance(value, geometry.Geometry):
        return geometry.to_geojson(value)
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    return str(value)


def frame_to_table_payload(frame: Frame) -> dict:
    return {
        "columns": list(frame.columns),
        "rows": [[_json_cell(v) for v in row] for row in frame.rows],
    }


def frame_to_feature_collection(frame: Frame) -> dict:
    geo_idx = [
        i for i, _ in enumerate(frame.columns)
        if any(isinstance(row[i], geometry.Geometry) for row in frame.rows)
    ]
    if len(geo_idx) != 1:
        raise ArtifactError("map layers need a frame with exactly one geometry column")
    gi = geo_idx[0]
    features = []
    for row in frame.rows:
        geom = row[gi]
        if not isinstance(geom, geometry.Geometry):
            raise ArtifactError("map layer row without a geometry value")
        props = {
            frame.columns[i]: _json_cell(v)
            for i, v in enumerate(row)
            if i != gi
        }
        features.append(
            {"type": "Feature", "properties": props, "geometry": geometry.to_geojson(geom)}
        )
    return {"type": "FeatureCollection", "features": features}
