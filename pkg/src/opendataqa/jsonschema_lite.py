"""Minimal JSON-schema checker covering the subset this package emits:
object/array/string/integer/number/boolean types, required, properties,
items, enum, minimum, additionalProperties.  Returns an error string with
a JSON-pointer-ish path, or None when the value validates.
"""
from __future__ import annotations


def check(value, schema: dict, path: str = "") -> str | None:
    kind = schema.get("type")
    if isinstance(kind, list):
        errors = [check(value, {**schema, "type": k}, path) for k in kind]
        if all(errors):
            return errors[0]
        return None
    if kind == "object":
        if not isinstance(value, dict):
            return f"{path or '/'}: expected object"
        for key in schema.get("required", []):
            if key not in value:
                return f"{path or '/'}: missing required property {key!r}"
        props = schema.get("properties", {})
        for key, sub in props.items():
            if key in value:
                err = check(value[key], sub, f"{path}/{key}")
                if err:
                    return err
        if schema.get("additionalProperties") is False:
            extra = [k for k in value if k not in props]
            if extra:
                return f"{path or '/'}: unexpected properties {extra}"
        return None
    if kind == "array":
        if not isinstance(value, list):
            return f"{path or '/'}: expected array"
        item_schema = schema.get("items")
        if item_schema:
            for i, item in enumerate(value):
                err = check(item, item_schema, f"{path}/{i}")
                if err:
                    return err
        return None
    if kind == "string" and not isinstance(value, str):
        return f"{path or '/'}: expected string"
    if kind == "integer" and (isinstance(value, bool) or not isinstance(value, int)):
        return f"{path or '/'}: expected integer"
    if kind == "number" and (isinstance(value, bool) or not isinstance(value, (int, float))):
        return f"{path or '/'}: expected number"
    if kind == "boolean" and not isinstance(value, bool):
        return f"{path or '/'}: expected boolean"
    if kind == "null" and value is not None:
        return f"{path or '/'}: expected null"
    if "enum" in schema and value not in schema["enum"]:
        return f"{path or '/'}: {value!r} not one of {schema['enum']}"
    minimum = schema.get("minimum")
    if minimum is not None and isinstance(value, (int, float)) and not isinstance(value, bool):
        if value < minimum:
            return f"{path or '/'}: {value} below minimum {minimum}"
    return None
