"""Registered standard library of the analysis language.

Everything reachable from sandboxed code is defined here: builtins, frame
operations, the `geo` and `math` modules, output/artifact functions, and
the per-type method tables.  The module also publishes the documented
allowlist used by the capability-soundness property test.
"""
from __future__ import annotations

import json
import math as _math
from importlib import resources

from .. import geometry
from .artifacts import (
    ArtifactError,
    frame_to_feature_collection,
    frame_to_table_payload,
    make_artifact,
)
from .runtime import FinalAnswerSignal, SandboxError
from .values import (
    BoundMethod,
    Builtin,
    Frame,
    GeocodeMiss,
    Grouped,
    Module,
    Row,
    UserFunction,
    render_plain,
    type_name,
)


def err(kind: str, message: str) -> SandboxError:
    return SandboxError(kind, message)


def _want(args, kwargs, name, count_min, count_max=None, allowed_kwargs=()):
    count_max = count_min if count_max is None else count_max
    if not (count_min <= len(args) <= count_max):
        expected = str(count_min) if count_min == count_max else f"{count_min} to {count_max}"
        raise err("TypeMismatch", f"{name}() takes {expected} arguments, got {len(args)}")
    for key in kwargs:
        if key not in allowed_kwargs:
            raise err("TypeMismatch", f"{name}() got an unexpected keyword argument {key!r}")


def _as_frame(value, name):
    if not isinstance(value, Frame):
        raise err("TypeMismatch", f"{name}() expects a frame, got {type_name(value)}")
    return value


def _as_geometry(value, name):
    if isinstance(value, geometry.Geometry):
        return value
    raise err("TypeMismatch", f"{name}() expects a geometry, got {type_name(value)}")


def _col_index(frame: Frame, column, name):
    if not isinstance(column, str):
        raise err("TypeMismatch", f"{name}() column must be a string")
    try:
        return frame.col_index(column)
    except KeyError:
        raise err(
            "IndexOutOfRange",
            f"column {column!r} not found; available: {', '.join(frame.columns)}",
        ) from None


def _vertex_count(geom: geometry.Geometry) -> int:
    return max(1, len(geometry._vertices(geom)))


def _iter_charged(ctx, value, what="value"):
    return ctx.iterate(value, what)


# ---------------------------------------------------------------------------
# builtins
# ---------------------------------------------------------------------------

def _bi_len(ctx, args, kwargs):
    _want(args, kwargs, "len", 1)
    v = args[0]
    if isinstance(v, (str, list, tuple, dict, range, Frame, Row, Grouped)):
        return len(v)
    raise err("TypeMismatch", f"len() unsupported for {type_name(v)}")


def _bi_range(ctx, args, kwargs):
    _want(args, kwargs, "range", 1, 3)
    for a in args:
        if isinstance(a, bool) or not isinstance(a, int):
            raise err("TypeMismatch", "range() arguments must be integers")
    if len(args) == 3 and args[2] == 0:
        raise err("TypeMismatch", "range() step must not be zero")
    return range(*args)


def _bi_print(ctx, args, kwargs):
    _want(args, kwargs, "print", 0, 64)
    ctx.write_log(" ".join(render_plain(a) for a in args) + "\n")
    return None


def _numeric_key(ctx, kwargs, name):
    key = kwargs.get("key")
    if key is not None and not isinstance(key, (Builtin, BoundMethod, UserFunction)):
        raise err("TypeMismatch", f"{name}() key must be a function")
    return key


def _bi_min_max(which):
    py = min if which == "min" else max

    def impl(ctx, args, kwargs):
        _want(args, kwargs, which, 1, 64, allowed_kwargs=("key", "default"))
        key = _numeric_key(ctx, kwargs, which)
        if len(args) == 1:
            items = list(_iter_charged(ctx, args[0], which))
            if not items:
                if "default" in kwargs:
                    return kwargs["default"]
                raise err("TypeMismatch", f"{which}() of an empty sequence")
        else:
            items = list(args)
        ctx.charge(len(items))
        try:
            if key is None:
                return py(items)
            decorated = [(ctx.call_function(key, [item], {}), i, item) for i, item in enumerate(items)]
            return py(decorated)[2]
        except TypeError:
            raise err("TypeMismatch", f"{which}() arguments are not comparable") from None

    return impl


def _bi_sum(ctx, args, kwargs):
    _want(args, kwargs, "sum", 1, 2)
    total = args[1] if len(args) == 2 else 0
    for item in _iter_charged(ctx, args[0], "sum"):
        if isinstance(item, bool) or not isinstance(item, (int, float)):
            raise err("TypeMismatch", f"sum() over non-numeric value {render_plain(item)!r}")
        total = total + item
    return total


def _bi_sorted(ctx, args, kwargs):
    _want(args, kwargs, "sorted", 1, 1, allowed_kwargs=("key", "reverse"))
    key = _numeric_key(ctx, kwargs, "sorted")
    reverse = bool(kwargs.get("reverse", False))
    items = list(_iter_charged(ctx, args[0], "sorted"))
    ctx.charge(len(items))
    try:
        if key is None:
            return sorted(items, reverse=reverse)
        return [
            item
            for _, _, item in sorted(
                ((ctx.call_function(key, [item], {}), i, item) for i, item in enumerate(items)),
                reverse=reverse,
            )
        ]
    except TypeError:
        raise err("TypeMismatch", "sorted() items are not comparable") from None


def _bi_abs(ctx, args, kwargs):
    _want(args, kwargs, "abs", 1)
    if isinstance(args[0], bool) or not isinstance(args[0], (int, float)):
        raise err("TypeMismatch", f"abs() expects a number, got {type_name(args[0])}")
    return abs(args[0])


def _bi_round(ctx, args, kwargs):
    _want(args, kwargs, "round", 1, 2)
    v = args[0]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise err("TypeMismatch", f"round() expects a number, got {type_name(v)}")
    if len(args) == 2:
        nd = args[1]
        if isinstance(nd, bool) or not isinstance(nd, int):
            raise err("TypeMismatch", "round() digit count must be an integer")
        return round(v, nd)
    return round(v)


def _bi_str(ctx, args, kwargs):
    _want(args, kwargs, "str", 0, 1)
    return render_plain(args[0]) if args else ""


def _bi_int(ctx, args, kwargs):
    _want(args, kwargs, "int", 0, 1)
    if not args:
        return 0
    v = args[0]
    try:
        if isinstance(v, str):
            return int(v.strip())
        if isinstance(v, (int, float)):
            return int(v)
    except (ValueError, OverflowError):
        raise err("TypeMismatch", f"int() cannot convert {render_plain(v)!r}") from None
    raise err("TypeMismatch", f"int() cannot convert {type_name(v)}")


def _bi_float(ctx, args, kwargs):
    _want(args, kwargs, "float", 0, 1)
    if not args:
        return 0.0
    v = args[0]
    try:
        if isinstance(v, (str, int, float)):
            return float(v.strip() if isinstance(v, str) else v)
    except ValueError:
        raise err("TypeMismatch", f"float() cannot convert {render_plain(v)!r}") from None
    raise err("TypeMismatch", f"float() cannot convert {type_name(v)}")


def _bi_enumerate(ctx, args, kwargs):
    _want(args, kwargs, "enumerate", 1, 2)
    start = args[1] if len(args) == 2 else 0
    if isinstance(start, bool) or not isinstance(start, int):
        raise err("TypeMismatch", "enumerate() start must be an integer")
    out = []
    for i, item in enumerate(_iter_charged(ctx, args[0], "enumerate"), start=start):
        out.append((i, item))
    ctx.check_collection(len(out))
    return out


def _bi_zip(ctx, args, kwargs):
    _want(args, kwargs, "zip", 1, 8)
    iterables = [list(_iter_charged(ctx, a, "zip")) for a in args]
    out = [tuple(vals) for vals in zip(*iterables)]
    ctx.check_collection(len(out))
    return out


# ---------------------------------------------------------------------------
# frame operations
# ---------------------------------------------------------------------------

def _fr_filter(ctx, args, kwargs):
    _want(args, kwargs, "filter", 2)
    if isinstance(args[1], Frame) and not isinstance(args[0], Frame):
        raise err("TypeMismatch", "filter() takes (frame, predicate_fn) in that order")
    frame = _as_frame(args[0], "filter")
    fn = args[1]
    if not isinstance(fn, (Builtin, BoundMethod, UserFunction)):
        raise err("TypeMismatch", "filter() predicate must be a function")
    ctx.charge(len(frame))
    kept = []
    for i in range(len(frame)):
        row = frame.row(i)
        if ctx.truthy(ctx.call_function(fn, [row], {})):
            kept.append(frame.rows[i])
    return Frame(frame.columns, kept, frame.crs)


def _fr_select(ctx, args, kwargs):
    _want(args, kwargs, "select", 2)
    frame = _as_frame(args[0], "select")
    cols = args[1]
    if not isinstance(cols, (list, tuple)) or not all(isinstance(c, str) for c in cols):
        raise err("TypeMismatch", "select() columns must be a list of names")
    idx = [_col_index(frame, c, "select") for c in cols]
    ctx.charge(len(frame))
    return Frame(list(cols), [tuple(row[i] for i in idx) for row in frame.rows], frame.crs)


def _fr_sort(ctx, args, kwargs):
    _want(args, kwargs, "sort", 2, 3, allowed_kwargs=("descending",))
    frame = _as_frame(args[0], "sort")
    idx = _col_index(frame, args[1], "sort")
    descending = bool(args[2]) if len(args) == 3 else bool(kwargs.get("descending", False))
    ctx.charge(len(frame))

    def key(row):
        v = row[idx]
        return (v is None, v) if not descending else (v is not None, v)

    try:
        rows = sorted(frame.rows, key=key, reverse=descending)
    except TypeError:
        raise err("TypeMismatch", f"sort() column {args[1]!r} has incomparable values") from None
    return Frame(frame.columns, rows, frame.crs)


def _fr_head(ctx, args, kwargs):
    _want(args, kwargs, "head", 2)
    frame = _as_frame(args[0], "head")
    n = args[1]
    if isinstance(n, bool) or not isinstance(n, int) or n < 0:
        raise err("TypeMismatch", "head() count must be a non-negative integer")
    ctx.charge(min(n, len(frame)))
    return Frame(frame.columns, frame.rows[:n], frame.crs)


def _fr_unique(ctx, args, kwargs):
    _want(args, kwargs, "unique", 2)
    frame = _as_frame(args[0], "unique")
    idx = _col_index(frame, args[1], "unique")
    ctx.charge(len(frame))
    seen = []
    for row in frame.rows:
        if row[idx] not in seen:
            seen.append(row[idx])
    return seen


def _fr_join(ctx, args, kwargs):
    _want(args, kwargs, "join", 4, 5, allowed_kwargs=("how",))
    left = _as_frame(args[0], "join")
    right = _as_frame(args[1], "join")
    li = _col_index(left, args[2], "join")
    ri = _col_index(right, args[3], "join")
    how = args[4] if len(args) == 5 else kwargs.get("how", "inner")
    if how not in ("inner", "left"):
        raise err("TypeMismatch", f"join() how must be 'inner' or 'left', got {how!r}")
    ctx.charge(len(left) + len(right))

    right_cols = [c for i, c in enumerate(right.columns) if i != ri]
    out_cols = list(left.columns) + [
        c if c not in left.columns else f"{c}_right" for c in right_cols
    ]
    lookup: dict = {}
    for row in right.rows:
        lookup.setdefault(row[ri], []).append(tuple(v for i, v in enumerate(row) if i != ri))
    rows = []
    for row in left.rows:
        matches = lookup.get(row[li], [])
        if matches:
            for extra in matches:
                rows.append(tuple(row) + extra)
        elif how == "left":
            rows.append(tuple(row) + (None,) * len(right_cols))
    ctx.check_collection(len(rows))
    ctx.charge(len(rows))
    return Frame(out_cols, rows, left.crs or right.crs)


def _fr_group_by(ctx, args, kwargs):
    _want(args, kwargs, "group_by", 2)
    frame = _as_frame(args[0], "group_by")
    idx = _col_index(frame, args[1], "group_by")
    ctx.charge(len(frame))
    groups: dict = {}
    for row in frame.rows:
        groups.setdefault(row[idx], []).append(row)
    return Grouped(
        frame.columns[idx],
        {k: Frame(frame.columns, v, frame.crs) for k, v in groups.items()},
    )


_AGG_FNS = ("count", "sum", "mean", "min", "max")


def _fr_agg(ctx, args, kwargs):
    _want(args, kwargs, "agg", 2)
    grouped = args[0]
    if not isinstance(grouped, Grouped):
        raise err("TypeMismatch", "agg() expects the result of group_by()")
    spec = args[1]
    if not isinstance(spec, dict) or not spec:
        raise err("TypeMismatch", "agg() expects {column: fn} with fn in " + str(_AGG_FNS))
    for col, fn in spec.items():
        if fn not in _AGG_FNS:
            raise err("TypeMismatch", f"agg() fn {fn!r} not in {_AGG_FNS}")
    out_cols = [grouped.key_column] + [f"{col}_{fn}" for col, fn in spec.items()]
    rows = []
    for key, sub in grouped.groups.items():
        ctx.charge(len(sub))
        cells = [key]
        for col, fn in spec.items():
            if fn == "count":
                cells.append(len(sub))
                continue
            values = [v for v in sub.column(str(col)) if v is not None] if col in sub.columns else None
            if values is None:
                raise err("IndexOutOfRange", f"column {col!r} not found in group frame")
            if not values:
                cells.append(None)
            elif fn == "sum":
                cells.append(sum(values))
            elif fn == "mean":
                cells.append(sum(values) / len(values))
            elif fn == "min":
                cells.append(min(values))
            elif fn == "max":
                cells.append(max(values))
        rows.append(tuple(cells))
    return Frame(out_cols, rows)


# ---------------------------------------------------------------------------
# geo module
# ---------------------------------------------------------------------------

def _geo_wrap(fn_name, fn, arity):
    def impl(ctx, args, kwargs):
        _want(args, kwargs, fn_name, arity)
        geoms = [_as_geometry(a, fn_name) for a in args]
        ctx.charge(sum(_vertex_count(g) for g in geoms))
        try:
            return fn(*geoms)
        except geometry.GeometryError as exc:
            raise err("TypeMismatch", str(exc)) from None

    return impl


def _geo_buffer(ctx, args, kwargs):
    _want(args, kwargs, "buffer", 2, 3, allowed_kwargs=("segments",))
    geom = _as_geometry(args[0], "buffer")
    radius = args[1]
    if isinstance(radius, bool) or not isinstance(radius, (int, float)):
        raise err("TypeMismatch", "buffer() radius must be a number")
    segments = args[2] if len(args) == 3 else kwargs.get("segments", 32)
    if isinstance(segments, bool) or not isinstance(segments, int):
        raise err("TypeMismatch", "buffer() segments must be an integer")
    ctx.charge(max(4, segments))
    try:
        return geometry.buffer(geom, float(radius), segments)
    except geometry.GeometryError as exc:
        raise err("TypeMismatch", str(exc)) from None


def _geo_point(ctx, args, kwargs):
    _want(args, kwargs, "point", 2, 3, allowed_kwargs=("crs",))
    x, y = args[0], args[1]
    for v in (x, y):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise err("TypeMismatch", "point() coordinates must be numbers")
    crs = args[2] if len(args) == 3 else kwargs.get("crs", ctx.session.gazetteer_crs)
    if not isinstance(crs, str):
        raise err("TypeMismatch", "point() crs must be a string")
    ctx.charge(1)
    return geometry.Point(float(x), float(y), crs=crs)


def _geo_geocode(ctx, args, kwargs):
    _want(args, kwargs, "geocode", 1)
    query = args[0]
    if not isinstance(query, str):
        raise err("TypeMismatch", "geocode() expects an address string")
    ctx.charge(1)
    places = ctx.session.gazetteer
    hit = places.get(query.strip().casefold())
    if hit is None:
        return GeocodeMiss(query)
    x, y = hit
    return geometry.Point(x, y, crs=ctx.session.gazetteer_crs)


def _geo_overlay(ctx, args, kwargs):
    _want(args, kwargs, "overlay", 3)
    left = _as_frame(args[0], "overlay")
    right = _as_frame(args[1], "overlay")
    predicate = args[2]
    predicates = {
        "intersects": geometry.intersects,
        "contains": geometry.contains,
        "within": geometry.within,
    }
    if predicate not in predicates:
        raise err("TypeMismatch", f"overlay() predicate must be one of {sorted(predicates)}")
    fn = predicates[predicate]

    def geo_col(frame: Frame, side: str) -> int:
        idx = [
            i
            for i in range(len(frame.columns))
            if any(isinstance(row[i], geometry.Geometry) for row in frame.rows)
        ]
        if len(idx) != 1:
            raise err("TypeMismatch", f"overlay() {side} frame needs exactly one geometry column")
        return idx[0]

    li, ri = geo_col(left, "left"), geo_col(right, "right")
    ctx.charge(len(left) * max(1, len(right)))
    right_cols = [c for c in right.columns]
    out_cols = list(left.columns) + [
        c if c not in left.columns else f"{c}_right" for c in right_cols
    ]
    rows = []
    for lrow in left.rows:
        for rrow in right.rows:
            a, b = lrow[li], rrow[ri]
            if not isinstance(a, geometry.Geometry) or not isinstance(b, geometry.Geometry):
                continue
            try:
                if fn(a, b):
                    rows.append(tuple(lrow) + tuple(rrow))
            except geometry.GeometryError as exc:
                raise err("TypeMismatch", str(exc)) from None
    ctx.check_collection(len(rows))
    return Frame(out_cols, rows, left.crs or right.crs)


# ---------------------------------------------------------------------------
# output / artifact functions
# ---------------------------------------------------------------------------

def _out_final_table(ctx, args, kwargs):
    _want(args, kwargs, "final_table", 1)
    frame = _as_frame(args[0], "final_table")
    ctx.charge(len(frame))
    try:
        ctx.emit_artifact(make_artifact("table", frame_to_table_payload(frame)))
    except ArtifactError as exc:
        raise err("TypeMismatch", str(exc)) from None
    return None


def _out_final_plot(ctx, args, kwargs):
    _want(args, kwargs, "final_plot", 4, 4, allowed_kwargs=("series", "title"))
    frame = _as_frame(args[0], "final_plot")
    mark, x, y = args[1], args[2], args[3]
    for v, label in ((mark, "mark"), (x, "x"), (y, "y")):
        if not isinstance(v, str):
            raise err("TypeMismatch", f"final_plot() {label} must be a string")
    series = kwargs.get("series")
    title = kwargs.get("title", "")
    fields = [x, y] + ([series] if series else [])
    for f in fields:
        _col_index(frame, f, "final_plot")
    ctx.charge(len(frame))
    data = []
    for row in frame.rows:
        rec = {}
        for f in fields:
            value = row[frame.col_index(f)]
            if isinstance(value, geometry.Geometry):
                raise err("TypeMismatch", "final_plot() cannot plot a geometry column")
            rec[f] = value
        data.append(rec)
    payload = {
        "mark": mark,
        "title": str(title),
        "x": {"field": x},
        "y": {"field": y},
        "series": series,
        "data": data,
    }
    try:
        ctx.emit_artifact(make_artifact("plot_spec", payload))
    except ArtifactError as exc:
        raise err("TypeMismatch", str(exc)) from None
    return None


def _layer_payload(ctx, name, value):
    if isinstance(value, Frame):
        ctx.charge(len(value))
        geojson = frame_to_feature_collection(value)
        crs = value.crs
    elif isinstance(value, geometry.Geometry):
        ctx.charge(_vertex_count(value))
        geojson = {
            "type": "FeatureCollection",
            "features": [
                {"type": "Feature", "properties": {}, "geometry": geometry.to_geojson(value)}
            ],
        }
        crs = value.crs
    else:
        raise err("TypeMismatch", f"map layer {name!r} must be a frame or geometry")
    return {"name": name, "geojson": geojson}, crs


def _out_final_map(ctx, args, kwargs):
    if not args and not kwargs:
        raise err("TypeMismatch", "final_map() needs at least one layer")
    layers = []
    crs = None
    for i, value in enumerate(args):
        layer, layer_crs = _layer_payload(ctx, f"layer_{i + 1}", value)
        layers.append(layer)
        crs = crs or layer_crs
    for name, value in kwargs.items():
        layer, layer_crs = _layer_payload(ctx, name, value)
        layers.append(layer)
        crs = crs or layer_crs
    payload = {"base": "tiles:osm", "crs": crs or geometry.DEFAULT_CRS, "layers": layers}
    try:
        ctx.emit_artifact(make_artifact("map_spec", payload))
    except ArtifactError as exc:
        raise err("TypeMismatch", str(exc)) from None
    return None


def _out_final_answer(ctx, args, kwargs):
    if kwargs:
        raise err("TypeMismatch", "final_answer() takes positional results only")
    if not args:
        raise err("TypeMismatch", "final_answer() needs at least one result")
    results = []
    for i, value in enumerate(args):
        if isinstance(value, str):
            results.append(("text", value))
        elif isinstance(value, bool) or isinstance(value, (int, float)):
            results.append(("text", render_plain(value)))
        elif isinstance(value, Frame):
            ctx.charge(len(value))
            results.append(("table", frame_to_table_payload(value)))
        elif isinstance(value, dict) and "mark" in value:
            results.append(("plot_spec", value))
        elif isinstance(value, dict) and "layers" in value:
            results.append(("map_spec", value))
        elif isinstance(value, geometry.Geometry):
            layer, crs = _layer_payload(ctx, "result", value)
            results.append(
                ("map_spec", {"base": "tiles:osm", "crs": crs or geometry.DEFAULT_CRS, "layers": [layer]})
            )
        else:
            raise err(
                "TypeMismatch",
                f"final_answer() result {i + 1} has unsupported type {type_name(value)}",
            )
    for kind, payload in results:
        try:
            make_artifact(kind, payload)
        except ArtifactError as exc:
            raise err("TypeMismatch", f"final_answer() result invalid: {exc}") from None
    raise FinalAnswerSignal(results)


# ---------------------------------------------------------------------------
# method tables
# ---------------------------------------------------------------------------

def _charge_text(ctx, s):
    ctx.charge(max(1, len(s) // 64))


def _str_method(name):
    def impl(ctx, self_value, args, kwargs):
        _charge_text(ctx, self_value)
        try:
            method = getattr(str, name)
            out = method(self_value, *args, **kwargs)
        except (TypeError, ValueError, AttributeError) as exc:
            raise err("TypeMismatch", f"str.{name}(): {exc}") from None
        if isinstance(out, list):
            ctx.check_collection(len(out))
        return out

    return impl


def _str_join(ctx, self_value, args, kwargs):
    _want(args, kwargs, "join", 1)
    items = list(ctx.iterate(args[0], "join"))
    for item in items:
        if not isinstance(item, str):
            raise err("TypeMismatch", "join() expects strings")
    ctx.charge(len(items))
    return self_value.join(items)


def _str_format(ctx, self_value, args, kwargs):
    _charge_text(ctx, self_value)
    try:
        return self_value.format(*[render_plain(a) if not isinstance(a, (int, float, str)) else a for a in args], **kwargs)
    except (ValueError, KeyError, IndexError) as exc:
        raise err("TypeMismatch", f"format(): {exc}") from None


STR_METHODS = {
    name: _str_method(name)
    for name in (
        "lower", "upper", "strip", "lstrip", "rstrip", "split", "replace",
        "startswith", "endswith", "find", "count", "title", "capitalize",
        "zfill", "isdigit", "isalpha",
    )
}
STR_METHODS["join"] = _str_join
STR_METHODS["format"] = _str_format


def _list_append(ctx, self_value, args, kwargs):
    _want(args, kwargs, "append", 1)
    ctx.check_collection(len(self_value) + 1)
    ctx.charge(1)
    self_value.append(args[0])
    return None


def _list_extend(ctx, self_value, args, kwargs):
    _want(args, kwargs, "extend", 1)
    items = list(ctx.iterate(args[0], "extend"))
    ctx.check_collection(len(self_value) + len(items))
    self_value.extend(items)
    return None


def _list_pop(ctx, self_value, args, kwargs):
    _want(args, kwargs, "pop", 0, 1)
    ctx.charge(1)
    try:
        return self_value.pop(*args)
    except IndexError:
        raise err("IndexOutOfRange", "pop from an empty list or bad index") from None
    except TypeError:
        raise err("TypeMismatch", "pop() index must be an integer") from None


def _list_sort(ctx, self_value, args, kwargs):
    _want(args, kwargs, "sort", 0, 0, allowed_kwargs=("key", "reverse"))
    key = kwargs.get("key")
    reverse = bool(kwargs.get("reverse", False))
    ctx.charge(len(self_value))
    try:
        if key is None:
            self_value.sort(reverse=reverse)
        else:
            decorated = [
                (ctx.call_function(key, [item], {}), i, item) for i, item in enumerate(self_value)
            ]
            decorated.sort(reverse=reverse)
            self_value[:] = [item for _, _, item in decorated]
    except TypeError:
        raise err("TypeMismatch", "sort() items are not comparable") from None
    return None


def _list_simple(name):
    def impl(ctx, self_value, args, kwargs):
        ctx.charge(max(1, len(self_value) // 16))
        try:
            return getattr(list, name)(self_value, *args, **kwargs)
        except ValueError as exc:
            raise err("IndexOutOfRange", str(exc)) from None
        except TypeError as exc:
            raise err("TypeMismatch", f"list.{name}(): {exc}") from None

    return impl


LIST_METHODS = {
    "append": _list_append,
    "extend": _list_extend,
    "pop": _list_pop,
    "sort": _list_sort,
    "insert": _list_simple("insert"),
    "remove": _list_simple("remove"),
    "index": _list_simple("index"),
    "count": _list_simple("count"),
    "reverse": _list_simple("reverse"),
}

TUPLE_METHODS = {
    "index": _list_simple("index"),
    "count": _list_simple("count"),
}


def _dict_method(name):
    def impl(ctx, self_value, args, kwargs):
        ctx.charge(max(1, len(self_value) // 16))
        try:
            out = getattr(dict, name)(self_value, *args, **kwargs)
        except KeyError as exc:
            raise err("IndexOutOfRange", f"key {exc.args[0]!r} not found") from None
        except TypeError as exc:
            raise err("TypeMismatch", f"dict.{name}(): {exc}") from None
        if name in ("keys", "values"):
            return list(out)
        if name == "items":
            return [tuple(pair) for pair in out]
        return out

    return impl


DICT_METHODS = {
    name: _dict_method(name)
    for name in ("get", "keys", "values", "items", "update", "pop", "setdefault")
}


def _row_get(ctx, self_value, args, kwargs):
    _want(args, kwargs, "get", 1, 2)
    ctx.charge(1)
    try:
        return self_value.get(args[0])
    except KeyError:
        if len(args) == 2:
            return args[1]
        raise err("IndexOutOfRange", f"column {args[0]!r} not found") from None


def _row_to_dict(ctx, self_value, args, kwargs):
    _want(args, kwargs, "to_dict", 0)
    ctx.charge(len(self_value.values))
    return self_value.to_dict()


ROW_METHODS = {"get": _row_get, "to_dict": _row_to_dict}


def _grouped_keys(ctx, self_value, args, kwargs):
    _want(args, kwargs, "keys", 0)
    ctx.charge(len(self_value.groups))
    return list(self_value.groups.keys())


GROUPED_METHODS = {"keys": _grouped_keys}

METHOD_TABLES = {
    str: STR_METHODS,
    list: LIST_METHODS,
    tuple: TUPLE_METHODS,
    dict: DICT_METHODS,
    Row: ROW_METHODS,
    Grouped: GROUPED_METHODS,
}

# read-only attributes per value type
def _frame_attrs(frame: Frame) -> dict:
    return {"columns": list(frame.columns), "crs": frame.crs}


def _geometry_attrs(geom: geometry.Geometry) -> dict:
    attrs = {"crs": geom.crs, "kind": geom.kind}
    if isinstance(geom, geometry.Point):
        attrs["x"] = geom.x
        attrs["y"] = geom.y
    return attrs


def value_attributes(value) -> dict:
    if isinstance(value, Frame):
        return _frame_attrs(value)
    if isinstance(value, geometry.Geometry):
        return _geometry_attrs(value)
    if isinstance(value, GeocodeMiss):
        return {"query": value.query}
    return {}


# ---------------------------------------------------------------------------
# assembly + documented allowlist
# ---------------------------------------------------------------------------

def _math_fn(name, fn, arity=1):
    def impl(ctx, args, kwargs):
        _want(args, kwargs, f"math.{name}", arity)
        for a in args:
            if isinstance(a, bool) or not isinstance(a, (int, float)):
                raise err("TypeMismatch", f"math.{name}() expects numbers")
        ctx.charge(1)
        try:
            return fn(*args)
        except ValueError as exc:
            raise err("TypeMismatch", f"math.{name}(): {exc}") from None
        except OverflowError:
            raise err("TypeMismatch", f"math.{name}(): result too large") from None

    return Builtin(f"math.{name}", impl)


def build_math_module() -> Module:
    members: dict = {"pi": _math.pi, "e": _math.e, "tau": _math.tau}
    for name, fn, arity in [
        ("sqrt", _math.sqrt, 1), ("floor", _math.floor, 1), ("ceil", _math.ceil, 1),
        ("log", _math.log, 1), ("exp", _math.exp, 1), ("sin", _math.sin, 1),
        ("cos", _math.cos, 1), ("tan", _math.tan, 1), ("atan2", _math.atan2, 2),
        ("hypot", _math.hypot, 2), ("radians", _math.radians, 1),
        ("degrees", _math.degrees, 1), ("fabs", _math.fabs, 1),
    ]:
        members[name] = _math_fn(name, fn, arity)
    return Module("math", members)


def build_geo_module() -> Module:
    members = {
        "distance": Builtin("geo.distance", _geo_wrap("distance", geometry.distance, 2)),
        "length": Builtin("geo.length", _geo_wrap("length", geometry.length, 1)),
        "area": Builtin("geo.area", _geo_wrap("area", geometry.area, 1)),
        "centroid": Builtin("geo.centroid", _geo_wrap("centroid", geometry.centroid, 1)),
        "buffer": Builtin("geo.buffer", _geo_buffer),
        "contains": Builtin("geo.contains", _geo_wrap("contains", geometry.contains, 2)),
        "within": Builtin("geo.within", _geo_wrap("within", geometry.within, 2)),
        "intersects": Builtin("geo.intersects", _geo_wrap("intersects", geometry.intersects, 2)),
        "intersection": Builtin("geo.intersection", _geo_wrap("intersection", geometry.intersection, 2)),
        "overlay": Builtin("geo.overlay", _geo_overlay),
        "geocode": Builtin("geo.geocode", _geo_geocode),
        "point": Builtin("geo.point", _geo_point),
    }
    return Module("geo", members)


GLOBAL_FUNCTIONS = {
    "len": _bi_len,
    "range": _bi_range,
    "print": _bi_print,
    "min": _bi_min_max("min"),
    "max": _bi_min_max("max"),
    "sum": _bi_sum,
    "sorted": _bi_sorted,
    "abs": _bi_abs,
    "round": _bi_round,
    "str": _bi_str,
    "int": _bi_int,
    "float": _bi_float,
    "enumerate": _bi_enumerate,
    "zip": _bi_zip,
    "filter": _fr_filter,
    "select": _fr_select,
    "sort": _fr_sort,
    "head": _fr_head,
    "unique": _fr_unique,
    "join": _fr_join,
    "group_by": _fr_group_by,
    "agg": _fr_agg,
    "final_table": _out_final_table,
    "final_plot": _out_final_plot,
    "final_map": _out_final_map,
    "final_answer": _out_final_answer,
}


def load_default_gazetteer() -> tuple[dict, str]:
    raw = resources.files("opendataqa.assets").joinpath("gazetteer.json").read_text("utf-8")
    doc = json.loads(raw)
    places = {name.strip().casefold(): tuple(xy) for name, xy in doc["places"].items()}
    return places, doc.get("crs", geometry.DEFAULT_CRS)


def install(session) -> None:
    """Bind the standard library into a fresh session."""
    for name, fn in GLOBAL_FUNCTIONS.items():
        session.globals.assign(name, Builtin(name, fn))
    for module in (build_geo_module(), build_math_module()):
        session.modules[module.name] = module
        session.globals.assign(module.name, module)


# documented allowlist: everything a fresh session can reach, used by the
# capability-soundness property test and the language reference
ALLOWED_GLOBALS = frozenset(GLOBAL_FUNCTIONS) | {"geo", "math"}
ALLOWED_MODULE_MEMBERS = {
    "geo": frozenset(
        {
            "distance", "length", "area", "centroid", "buffer", "contains",
            "within", "intersects", "intersection", "overlay", "geocode", "point",
        }
    ),
    "math": frozenset(
        {
            "pi", "e", "tau", "sqrt", "floor", "ceil", "log", "exp", "sin",
            "cos", "tan", "atan2", "hypot", "radians", "degrees", "fabs",
        }
    ),
}
ALLOWED_METHODS = {
    "str": frozenset(STR_METHODS),
    "list": frozenset(LIST_METHODS),
    "tuple": frozenset(TUPLE_METHODS),
    "dict": frozenset(DICT_METHODS),
    "row": frozenset(ROW_METHODS),
    "grouped": frozenset(GROUPED_METHODS),
}
ALLOWED_ATTRIBUTES = {
    "frame": frozenset({"columns", "crs"}),
    "point": frozenset({"x", "y", "crs", "kind"}),
    "geometry": frozenset({"crs", "kind"}),
    "geocode_miss": frozenset({"query"}),
}
