"""Runtime values of the analysis language beyond plain Python scalars,
lists, tuples, and dicts: tabular frames, grouped frames, registered
modules, callables, and the geocoder miss value.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date
from typing import Callable, Sequence

from .. import geometry


class Frame:
    """Immutable column-ordered table; cells are scalars or geometries."""

    __slots__ = ("columns", "rows", "crs")

    def __init__(self, columns: Sequence[str], rows: Sequence[tuple], crs: str | None = None):
        self.columns = list(columns)
        self.rows = [tuple(r) for r in rows]
        self.crs = crs
        for i, row in enumerate(self.rows):
            if len(row) != len(self.columns):
                raise ValueError(f"row {i} has {len(row)} cells for {len(self.columns)} columns")

    def col_index(self, name: str) -> int:
        try:
            return self.columns.index(name)
        except ValueError:
            raise KeyError(name) from None

    def column(self, name: str) -> list:
        idx = self.col_index(name)
        return [row[idx] for row in self.rows]

    def row(self, i: int) -> "Row":
        return Row(self.columns, self.rows[i])

    def __len__(self) -> int:
        return len(self.rows)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Frame)
            and self.columns == other.columns
            and self.rows == other.rows
        )

    def __repr__(self) -> str:
        return f"Frame({len(self.rows)} rows x {len(self.columns)} columns)"


class Row:
    __slots__ = ("columns", "values")

    def __init__(self, columns: Sequence[str], values: tuple):
        self.columns = columns
        self.values = values

    def get(self, name: str):
        try:
            return self.values[list(self.columns).index(name)]
        except ValueError:
            raise KeyError(name) from None

    def __len__(self) -> int:
        return len(self.values)

    def to_dict(self) -> dict:
        return dict(zip(self.columns, self.values))

    def __repr__(self) -> str:
        inner = ", ".join(f"{c}={render_repr(v)}" for c, v in zip(self.columns, self.values))
        return f"Row({inner})"


class Grouped:
    """Result of group_by: ordered mapping of key -> sub-frame."""

    __slots__ = ("key_column", "groups")

    def __init__(self, key_column: str, groups: dict):
        self.key_column = key_column
        self.groups = groups

    def __len__(self) -> int:
        return len(self.groups)

    def __repr__(self) -> str:
        return f"Grouped({len(self.groups)} groups by {self.key_column!r})"


class GeocodeMiss:
    """Falsy marker returned by geocode() for unknown places."""

    __slots__ = ("query",)

    def __init__(self, query: str):
        self.query = query

    def __bool__(self) -> bool:
        return False

    def __repr__(self) -> str:
        return f"<no geocode match for {self.query!r}>"


@dataclass(frozen=True)
class Module:
    """Registered module: a flat table of members, no submodules."""

    name: str
    members: dict = field(hash=False)


class Builtin:
    """Native function exposed to the sandbox; receives the interpreter
    context so it can charge operations and append artifacts."""

    __slots__ = ("name", "fn")

    def __init__(self, name: str, fn: Callable):
        self.name = name
        self.fn = fn

    def __repr__(self) -> str:
        return f"<function {self.name}>"


class BoundMethod:
    __slots__ = ("name", "fn", "self_value")

    def __init__(self, name: str, fn: Callable, self_value):
        self.name = name
        self.fn = fn
        self.self_value = self_value

    def __repr__(self) -> str:
        return f"<method {self.name}>"


class UserFunction:
    __slots__ = ("name", "params", "body", "closure")

    def __init__(self, name: str, params: tuple, body: tuple, closure):
        self.name = name
        self.params = params
        self.body = body
        self.closure = closure

    def __repr__(self) -> str:
        return f"<function {self.name}>"


# ---------------------------------------------------------------------------
# Rendering (used by print, the final-expression value, and error messages)
# ---------------------------------------------------------------------------

def type_name(value) -> str:
    if value is None:
        return "None"
    if isinstance(value, bool):
        return "bool"
    if isinstance(value, int):
        return "int"
    if isinstance(value, float):
        return "float"
    if isinstance(value, str):
        return "str"
    if isinstance(value, list):
        return "list"
    if isinstance(value, tuple):
        return "tuple"
    if isinstance(value, dict):
        return "dict"
    if isinstance(value, range):
        return "range"
    if isinstance(value, Frame):
        return "frame"
    if isinstance(value, Row):
        return "row"
    if isinstance(value, Grouped):
        return "grouped"
    if isinstance(value, geometry.Geometry):
        return value.kind.lower()
    if isinstance(value, GeocodeMiss):
        return "geocode_miss"
    if isinstance(value, Module):
        return "module"
    if isinstance(value, (Builtin, BoundMethod, UserFunction)):
        return "function"
    return type(value).__name__


_MAX_FRAME_PREVIEW = 10


def render_frame(frame: Frame) -> str:
    header = f"Frame({len(frame.rows)} rows x {len(frame.columns)} columns)"
    if not frame.columns:
        return header
    shown = frame.rows[:_MAX_FRAME_PREVIEW]
    cells = [[str(c) for c in frame.columns]]
    for row in shown:
        cells.append([render_plain(v) for v in row])
    widths = [max(len(r[i]) for r in cells) for i in range(len(frame.columns))]
    lines = [header]
    for j, row in enumerate(cells):
        lines.append("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip())
        if j == 0:
            lines.append("  ".join("-" * w for w in widths))
    if len(frame.rows) > _MAX_FRAME_PREVIEW:
        lines.append(f"... ({len(frame.rows) - _MAX_FRAME_PREVIEW} more rows)")
    return "\n".join(lines)


def render_plain(value) -> str:
    """str()-style rendering."""
    if value is None:
        return "None"
    if isinstance(value, bool):
        return "True" if value else "False"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, str):
        return value
    if isinstance(value, (list, tuple, dict)):
        return render_repr(value)
    if isinstance(value, Frame):
        return render_frame(value)
    if isinstance(value, geometry.Point):
        return f"Point({value.x}, {value.y})"
    if isinstance(value, geometry.Geometry):
        return f"{value.kind}(...)"
    if isinstance(value, date):
        return value.isoformat()
    return repr(value)


def render_repr(value) -> str:
    """repr()-style rendering."""
    if isinstance(value, str):
        return repr(value)
    if isinstance(value, list):
        return "[" + ", ".join(render_repr(v) for v in value) + "]"
    if isinstance(value, tuple):
        inner = ", ".join(render_repr(v) for v in value)
        return f"({inner},)" if len(value) == 1 else f"({inner})"
    if isinstance(value, dict):
        return "{" + ", ".join(f"{render_repr(k)}: {render_repr(v)}" for k, v in value.items()) + "}"
    return render_plain(value)
