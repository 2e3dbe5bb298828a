"""Geometry primitives for tabular-geospatial analysis.

Planar math is used for projected CRSs; spherical math (mean earth radius
R = 6,371,000 m) for geographic coordinates (EPSG:4326).  Containment uses
the winding number; points exactly on a boundary count as contained.
Coordinates are (x, y) tuples; for geographic CRSs that is (lon, lat).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

EARTH_RADIUS_M = 6_371_000.0
GEOGRAPHIC_CRS = frozenset({"EPSG:4326", "CRS84", "OGC:CRS84", "WGS84"})
DEFAULT_CRS = "EPSG:4326"

Coord = tuple[float, float]


class GeometryError(Exception):
    """Invalid geometry or an operation applied to an unsupported shape."""


def is_geographic(crs: str) -> bool:
    return crs.upper() in GEOGRAPHIC_CRS


# ---------------------------------------------------------------------------
# Geometry types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Geometry:
    crs: str = field(default=DEFAULT_CRS, kw_only=True)

    @property
    def kind(self) -> str:
        return type(self).__name__


@dataclass(frozen=True)
class Point(Geometry):
    x: float
    y: float

    def coords(self) -> Coord:
        return (self.x, self.y)


@dataclass(frozen=True)
class LineString(Geometry):
    points: tuple[Coord, ...]

    def __post_init__(self):
        if len(self.points) < 2:
            raise GeometryError("a linestring needs at least 2 points")


@dataclass(frozen=True)
class Polygon(Geometry):
    exterior: tuple[Coord, ...]
    holes: tuple[tuple[Coord, ...], ...] = ()

    def __post_init__(self):
        for ring in (self.exterior, *self.holes):
            if len(ring) < 4:
                raise GeometryError("a polygon ring needs at least 4 points")
            if ring[0] != ring[-1]:
                raise GeometryError("polygon ring is not closed")

    def rings(self) -> Iterable[tuple[Coord, ...]]:
        yield self.exterior
        yield from self.holes


@dataclass(frozen=True)
class MultiPoint(Geometry):
    points: tuple[Coord, ...]


@dataclass(frozen=True)
class MultiLineString(Geometry):
    lines: tuple[tuple[Coord, ...], ...]


@dataclass(frozen=True)
class MultiPolygon(Geometry):
    polygons: tuple[Polygon, ...]


# ---------------------------------------------------------------------------
# GeoJSON conversion
# ---------------------------------------------------------------------------

def _coord(raw) -> Coord:
    if not isinstance(raw, (list, tuple)) or len(raw) < 2:
        raise GeometryError(f"bad coordinate: {raw!r}")
    return (float(raw[0]), float(raw[1]))


def _ring(raw) -> tuple[Coord, ...]:
    return tuple(_coord(c) for c in raw)


def from_geojson(obj: dict, crs: str = DEFAULT_CRS) -> Geometry:
    """Parse one GeoJSON geometry object (not a Feature)."""
    if not isinstance(obj, dict) or "type" not in obj:
        raise GeometryError("not a GeoJSON geometry object")
    gtype = obj["type"]
    coords = obj.get("coordinates")
    if gtype == "Point":
        x, y = _coord(coords)
        return Point(x, y, crs=crs)
    if gtype == "MultiPoint":
        return MultiPoint(_ring(coords), crs=crs)
    if gtype == "LineString":
        return LineString(_ring(coords), crs=crs)
    if gtype == "MultiLineString":
        return MultiLineString(tuple(_ring(l) for l in coords), crs=crs)
    if gtype == "Polygon":
        rings = [_ring(r) for r in coords]
        if not rings:
            raise GeometryError("polygon without rings")
        return Polygon(rings[0], tuple(rings[1:]), crs=crs)
    if gtype == "MultiPolygon":
        polys = []
        for poly in coords:
            rings = [_ring(r) for r in poly]
            if not rings:
                raise GeometryError("polygon without rings")
            polys.append(Polygon(rings[0], tuple(rings[1:]), crs=crs))
        return MultiPolygon(tuple(polys), crs=crs)
    raise GeometryError(f"unsupported GeoJSON geometry type: {gtype}")


def to_geojson(geom: Geometry) -> dict:
    if isinstance(geom, Point):
        return {"type": "Point", "coordinates": [geom.x, geom.y]}
    if isinstance(geom, MultiPoint):
        return {"type": "MultiPoint", "coordinates": [list(c) for c in geom.points]}
    if isinstance(geom, LineString):
        return {"type": "LineString", "coordinates": [list(c) for c in geom.points]}
    if isinstance(geom, MultiLineString):
        return {
            "type": "MultiLineString",
            "coordinates": [[list(c) for c in line] for line in geom.lines],
        }
    if isinstance(geom, Polygon):
        return {
            "type": "Polygon",
            "coordinates": [[list(c) for c in r] for r in geom.rings()],
        }
    if isinstance(geom, MultiPolygon):
        return {
            "type": "MultiPolygon",
            "coordinates": [
                [[list(c) for c in r] for r in p.rings()] for p in geom.polygons
            ],
        }
    raise GeometryError(f"cannot serialize {type(geom).__name__}")


# ---------------------------------------------------------------------------
# Low-level planar helpers
# ---------------------------------------------------------------------------

def _cross(o: Coord, a: Coord, b: Coord) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _on_segment(p: Coord, a: Coord, b: Coord) -> bool:
    """p collinear with a-b assumed; is p within the segment's bounding box?"""
    return (
        min(a[0], b[0]) <= p[0] <= max(a[0], b[0])
        and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])
    )


def segments_intersect(a1: Coord, a2: Coord, b1: Coord, b2: Coord) -> bool:
    d1 = _cross(b1, b2, a1)
    d2 = _cross(b1, b2, a2)
    d3 = _cross(a1, a2, b1)
    d4 = _cross(a1, a2, b2)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and (
        (d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)
    ):
        return True
    if d1 == 0 and _on_segment(a1, b1, b2):
        return True
    if d2 == 0 and _on_segment(a2, b1, b2):
        return True
    if d3 == 0 and _on_segment(b1, a1, a2):
        return True
    if d4 == 0 and _on_segment(b2, a1, a2):
        return True
    return False


def segments_cross_properly(a1: Coord, a2: Coord, b1: Coord, b2: Coord) -> bool:
    """True when the open interiors of the segments cross."""
    d1 = _cross(b1, b2, a1)
    d2 = _cross(b1, b2, a2)
    d3 = _cross(a1, a2, b1)
    d4 = _cross(a1, a2, b2)
    return ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and (
        (d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)
    )


def segment_intersection_point(
    a1: Coord, a2: Coord, b1: Coord, b2: Coord
) -> Coord | None:
    """Intersection point of two proper-crossing or touching segments.

    Returns None for parallel disjoint segments; collinear overlaps are
    handled by the caller.
    """
    r = (a2[0] - a1[0], a2[1] - a1[1])
    s = (b2[0] - b1[0], b2[1] - b1[1])
    denom = r[0] * s[1] - r[1] * s[0]
    if denom == 0:
        return None
    qp = (b1[0] - a1[0], b1[1] - a1[1])
    t = (qp[0] * s[1] - qp[1] * s[0]) / denom
    u = (qp[0] * r[1] - qp[1] * r[0]) / denom
    if 0 <= t <= 1 and 0 <= u <= 1:
        return (a1[0] + t * r[0], a1[1] + t * r[1])
    return None


def point_on_segment(p: Coord, a: Coord, b: Coord) -> bool:
    return _cross(a, b, p) == 0 and _on_segment(p, a, b)


def point_in_ring(p: Coord, ring: Sequence[Coord]) -> bool:
    """Winding-number containment; boundary points count as inside."""
    wn = 0
    for i in range(len(ring) - 1):
        a, b = ring[i], ring[i + 1]
        if point_on_segment(p, a, b):
            return True
        if a[1] <= p[1]:
            if b[1] > p[1] and _cross(a, b, p) > 0:
                wn += 1
        else:
            if b[1] <= p[1] and _cross(a, b, p) < 0:
                wn -= 1
    return wn != 0


def point_in_polygon(p: Coord, poly: Polygon) -> bool:
    if not point_in_ring(p, poly.exterior):
        return False
    for hole in poly.holes:
        # boundary of a hole still belongs to the polygon
        if any(point_on_segment(p, hole[i], hole[i + 1]) for i in range(len(hole) - 1)):
            return True
        if point_in_ring(p, hole):
            return False
    return True


def ring_signed_area(ring: Sequence[Coord]) -> float:
    acc = 0.0
    for i in range(len(ring) - 1):
        x1, y1 = ring[i]
        x2, y2 = ring[i + 1]
        acc += x1 * y2 - x2 * y1
    return acc / 2.0


def _spherical_ring_area(ring: Sequence[Coord]) -> float:
    # exact for boundaries linear in (lon, sin lat); see module docstring
    total = 0.0
    for i in range(len(ring) - 1):
        lon1, lat1 = ring[i]
        lon2, lat2 = ring[i + 1]
        total += math.radians(lon2 - lon1) * (
            2.0 + math.sin(math.radians(lat1)) + math.sin(math.radians(lat2))
        )
    return abs(total) * EARTH_RADIUS_M * EARTH_RADIUS_M / 2.0


def haversine_m(a: Coord, b: Coord) -> float:
    lon1, lat1 = map(math.radians, a)
    lon2, lat2 = map(math.radians, b)
    h = (
        math.sin((lat2 - lat1) / 2.0) ** 2
        + math.cos(lat1) * math.cos(lat2) * math.sin((lon2 - lon1) / 2.0) ** 2
    )
    return 2.0 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def _planar_point_segment_distance(p: Coord, a: Coord, b: Coord) -> float:
    ax, ay = a
    bx, by = b
    px, py = p
    dx, dy = bx - ax, by - ay
    seg2 = dx * dx + dy * dy
    if seg2 == 0:
        return math.hypot(px - ax, py - ay)
    t = max(0.0, min(1.0, ((px - ax) * dx + (py - ay) * dy) / seg2))
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


# ---------------------------------------------------------------------------
# Shape decomposition helpers
# ---------------------------------------------------------------------------

def _vertices(geom: Geometry) -> list[Coord]:
    if isinstance(geom, Point):
        return [geom.coords()]
    if isinstance(geom, MultiPoint):
        return list(geom.points)
    if isinstance(geom, LineString):
        return list(geom.points)
    if isinstance(geom, MultiLineString):
        return [c for line in geom.lines for c in line]
    if isinstance(geom, Polygon):
        return [c for ring in geom.rings() for c in ring[:-1]]
    if isinstance(geom, MultiPolygon):
        return [c for p in geom.polygons for c in _vertices(p)]
    raise GeometryError(f"unsupported geometry: {type(geom).__name__}")


def _segments(geom: Geometry) -> list[tuple[Coord, Coord]]:
    segs: list[tuple[Coord, Coord]] = []
    if isinstance(geom, LineString):
        pts = geom.points
        segs.extend((pts[i], pts[i + 1]) for i in range(len(pts) - 1))
    elif isinstance(geom, MultiLineString):
        for line in geom.lines:
            segs.extend((line[i], line[i + 1]) for i in range(len(line) - 1))
    elif isinstance(geom, Polygon):
        for ring in geom.rings():
            segs.extend((ring[i], ring[i + 1]) for i in range(len(ring) - 1))
    elif isinstance(geom, MultiPolygon):
        for p in geom.polygons:
            segs.extend(_segments(p))
    return segs


def _polygons(geom: Geometry) -> list[Polygon]:
    if isinstance(geom, Polygon):
        return [geom]
    if isinstance(geom, MultiPolygon):
        return list(geom.polygons)
    return []


def _contains_point(geom: Geometry, p: Coord) -> bool:
    if isinstance(geom, (Polygon, MultiPolygon)):
        return any(point_in_polygon(p, poly) for poly in _polygons(geom))
    if isinstance(geom, Point):
        return geom.coords() == p
    if isinstance(geom, MultiPoint):
        return p in geom.points
    if isinstance(geom, (LineString, MultiLineString)):
        return any(point_on_segment(p, a, b) for a, b in _segments(geom))
    return False


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------

def _check_same_crs(a: Geometry, b: Geometry) -> str:
    if a.crs != b.crs:
        raise GeometryError(f"CRS mismatch: {a.crs} vs {b.crs}")
    return a.crs


def distance(a: Geometry, b: Geometry) -> float:
    """Minimum distance in CRS units (meters for geographic input)."""
    crs = _check_same_crs(a, b)
    if is_geographic(crs):
        if not isinstance(a, Point) or not isinstance(b, Point):
            raise GeometryError(
                "geographic distance is supported between points only"
            )
        return haversine_m(a.coords(), b.coords())
    if intersects(a, b):
        return 0.0
    best = math.inf
    segs_a, segs_b = _segments(a), _segments(b)
    verts_a, verts_b = _vertices(a), _vertices(b)
    for p in verts_a:
        for s in segs_b:
            best = min(best, _planar_point_segment_distance(p, *s))
        if not segs_b:
            for q in verts_b:
                best = min(best, math.hypot(p[0] - q[0], p[1] - q[1]))
    for q in verts_b:
        for s in segs_a:
            best = min(best, _planar_point_segment_distance(q, *s))
    return best


def length(geom: Geometry) -> float:
    """Path length of a linestring (CRS units; meters for geographic)."""
    if not isinstance(geom, (LineString, MultiLineString)):
        raise GeometryError("length is defined for linestrings")
    total = 0.0
    for a, b in _segments(geom):
        if is_geographic(geom.crs):
            total += haversine_m(a, b)
        else:
            total += math.hypot(b[0] - a[0], b[1] - a[1])
    return total


def area(geom: Geometry) -> float:
    """Polygon area (square CRS units; square meters for geographic)."""
    polys = _polygons(geom)
    if not polys:
        raise GeometryError("area is defined for polygons")
    total = 0.0
    for poly in polys:
        if is_geographic(poly.crs):
            total += _spherical_ring_area(poly.exterior)
            for hole in poly.holes:
                total -= _spherical_ring_area(hole)
        else:
            total += abs(ring_signed_area(poly.exterior))
            for hole in poly.holes:
                total -= abs(ring_signed_area(hole))
    return total


def centroid(geom: Geometry) -> Point:
    """Planar centroid; an approximation for geographic CRSs."""
    if isinstance(geom, Point):
        return geom
    if isinstance(geom, MultiPoint):
        xs = [c[0] for c in geom.points]
        ys = [c[1] for c in geom.points]
        return Point(sum(xs) / len(xs), sum(ys) / len(ys), crs=geom.crs)
    if isinstance(geom, (LineString, MultiLineString)):
        acc_x = acc_y = acc_len = 0.0
        for a, b in _segments(geom):
            seg_len = math.hypot(b[0] - a[0], b[1] - a[1])
            acc_x += (a[0] + b[0]) / 2.0 * seg_len
            acc_y += (a[1] + b[1]) / 2.0 * seg_len
            acc_len += seg_len
        if acc_len == 0:
            p = _vertices(geom)[0]
            return Point(p[0], p[1], crs=geom.crs)
        return Point(acc_x / acc_len, acc_y / acc_len, crs=geom.crs)
    polys = _polygons(geom)
    if not polys:
        raise GeometryError(f"centroid unsupported for {type(geom).__name__}")
    acc_x = acc_y = acc_area = 0.0
    for poly in polys:
        for sign, ring in [(1.0, poly.exterior)] + [(-1.0, h) for h in poly.holes]:
            a_signed = ring_signed_area(ring)
            if a_signed == 0:
                continue
            cx = cy = 0.0
            for i in range(len(ring) - 1):
                x1, y1 = ring[i]
                x2, y2 = ring[i + 1]
                w = x1 * y2 - x2 * y1
                cx += (x1 + x2) * w
                cy += (y1 + y2) * w
            cx /= 6.0 * a_signed
            cy /= 6.0 * a_signed
            weight = sign * abs(a_signed)
            acc_x += cx * weight
            acc_y += cy * weight
            acc_area += weight
    if acc_area == 0:
        p = _vertices(geom)[0]
        return Point(p[0], p[1], crs=geom.crs)
    return Point(acc_x / acc_area, acc_y / acc_area, crs=geom.crs)


def buffer(geom: Geometry, radius: float, segments: int = 32) -> Polygon:
    """Circle approximation around a point, in projected CRSs only."""
    if is_geographic(geom.crs):
        raise GeometryError(
            "buffer is not supported in geographic CRSs; project the data first"
        )
    if not isinstance(geom, Point):
        raise GeometryError("buffer supports point geometries")
    if radius <= 0:
        raise GeometryError("buffer radius must be positive")
    if segments < 4:
        raise GeometryError("buffer needs at least 4 segments")
    ring = []
    for i in range(segments):
        theta = 2.0 * math.pi * i / segments
        ring.append((geom.x + radius * math.cos(theta), geom.y + radius * math.sin(theta)))
    ring.append(ring[0])
    return Polygon(tuple(ring), crs=geom.crs)


def contains(a: Geometry, b: Geometry) -> bool:
    """Every point of b lies in a (boundary included)."""
    _check_same_crs(a, b)
    if isinstance(a, Point):
        return isinstance(b, Point) and a.coords() == b.coords()
    if isinstance(a, (LineString, MultiLineString)):
        return all(_contains_point(a, v) for v in _vertices(b)) and not isinstance(
            b, (Polygon, MultiPolygon)
        )
    if isinstance(a, (Polygon, MultiPolygon)):
        if not all(_contains_point(a, v) for v in _vertices(b)):
            return False
        segs_a = _segments(a)
        for s in _segments(b):
            if any(segments_cross_properly(*s, *t) for t in segs_a):
                return False
        return True
    return False


def within(a: Geometry, b: Geometry) -> bool:
    return contains(b, a)


def intersects(a: Geometry, b: Geometry) -> bool:
    _check_same_crs(a, b)
    for v in _vertices(a):
        if _contains_point(b, v):
            return True
    for v in _vertices(b):
        if _contains_point(a, v):
            return True
    segs_a, segs_b = _segments(a), _segments(b)
    for s in segs_a:
        for t in segs_b:
            if segments_intersect(*s, *t):
                return True
    return False


def _edge_line_crossing(p1: Coord, p2: Coord, a: Coord, b: Coord) -> Coord:
    """Where segment p1-p2 crosses the infinite line through a-b.

    Callers guarantee p1 and p2 are on strictly opposite sides.
    """
    d1 = _cross(a, b, p1)
    d2 = _cross(a, b, p2)
    t = d1 / (d1 - d2)
    return (p1[0] + t * (p2[0] - p1[0]), p1[1] + t * (p2[1] - p1[1]))


def _clip_ring_convex(subject: Sequence[Coord], clip: Sequence[Coord]) -> list[Coord]:
    """Sutherland-Hodgman; clip ring must be convex and counterclockwise."""
    output = list(subject[:-1]) if subject[0] == subject[-1] else list(subject)
    for i in range(len(clip) - 1):
        a, b = clip[i], clip[i + 1]
        if not output:
            return []
        src = output
        output = []
        for j in range(len(src)):
            cur = src[j]
            prev = src[j - 1]
            cur_in = _cross(a, b, cur) >= 0
            prev_in = _cross(a, b, prev) >= 0
            if cur_in:
                if not prev_in:
                    output.append(_edge_line_crossing(prev, cur, a, b))
                output.append(cur)
            elif prev_in:
                output.append(_edge_line_crossing(prev, cur, a, b))
    return output


def _is_convex(ring: Sequence[Coord]) -> bool:
    sign = 0
    n = len(ring) - 1
    for i in range(n):
        c = _cross(ring[i], ring[(i + 1) % n], ring[(i + 2) % n])
        if c != 0:
            if sign == 0:
                sign = 1 if c > 0 else -1
            elif (c > 0) != (sign > 0):
                return False
    return True


def _ccw_ring(ring: Sequence[Coord]) -> list[Coord]:
    pts = list(ring)
    if ring_signed_area(pts) < 0:
        pts = pts[::-1]
    return pts


def intersection(a: Geometry, b: Geometry) -> Geometry | None:
    """Geometric intersection for the supported shape pairs.

    point x anything -> the point when contained; segment pairs -> crossing
    point (or overlap segment when collinear); linestring x polygon -> the
    clipped parts; polygon x polygon -> Sutherland-Hodgman, which requires
    one convex operand.  Returns None for an empty intersection.
    """
    _check_same_crs(a, b)
    if isinstance(a, Point):
        return a if _contains_point(b, a.coords()) else None
    if isinstance(b, Point):
        return b if _contains_point(a, b.coords()) else None

    if isinstance(a, (LineString, MultiLineString)) and isinstance(
        b, (LineString, MultiLineString)
    ):
        pts: list[Coord] = []
        for s in _segments(a):
            for t in _segments(b):
                ip = segment_intersection_point(*s, *t)
                if ip is not None and ip not in pts:
                    pts.append(ip)
        if not pts:
            return None
        if len(pts) == 1:
            return Point(pts[0][0], pts[0][1], crs=a.crs)
        return MultiPoint(tuple(pts), crs=a.crs)

    line, poly_geom = None, None
    if isinstance(a, (LineString, MultiLineString)) and _polygons(b):
        line, poly_geom = a, b
    elif isinstance(b, (LineString, MultiLineString)) and _polygons(a):
        line, poly_geom = b, a
    if line is not None and poly_geom is not None:
        pieces: list[tuple[Coord, ...]] = []
        for seg in _segments(line):
            pieces.extend(_clip_segment_to_polygons(seg, _polygons(poly_geom)))
        if not pieces:
            return None
        if len(pieces) == 1:
            return LineString(pieces[0], crs=line.crs)
        return MultiLineString(tuple(pieces), crs=line.crs)

    polys_a, polys_b = _polygons(a), _polygons(b)
    if polys_a and polys_b:
        out: list[Polygon] = []
        for pa in polys_a:
            for pb in polys_b:
                clipped = _intersect_polygons(pa, pb)
                if clipped is not None:
                    out.append(clipped)
        if not out:
            return None
        if len(out) == 1:
            return out[0]
        return MultiPolygon(tuple(out), crs=a.crs)
    raise GeometryError(
        f"intersection unsupported for {type(a).__name__} x {type(b).__name__}"
    )


def _intersect_polygons(pa: Polygon, pb: Polygon) -> Polygon | None:
    if pa.holes or pb.holes:
        raise GeometryError("polygon intersection does not support holes")
    clip, subject = pb, pa
    if not _is_convex(clip.exterior):
        clip, subject = pa, pb
        if not _is_convex(clip.exterior):
            raise GeometryError(
                "polygon intersection requires one convex operand"
            )
    clipped = _clip_ring_convex(
        _ccw_ring(subject.exterior), _ccw_ring(clip.exterior)
    )
    if len(clipped) < 3:
        return None
    ring = tuple(clipped) + (clipped[0],)
    if abs(ring_signed_area(ring)) == 0:
        return None
    return Polygon(ring, crs=pa.crs)


def _clip_segment_to_polygons(
    seg: tuple[Coord, Coord], polys: list[Polygon]
) -> list[tuple[Coord, ...]]:
    """Parts of one segment lying inside any of the polygons."""
    a, b = seg
    cuts = [0.0, 1.0]
    for poly in polys:
        for s in _segments(poly):
            ip = segment_intersection_point(a, b, *s)
            if ip is not None:
                dx, dy = b[0] - a[0], b[1] - a[1]
                denom = dx * dx + dy * dy
                if denom > 0:
                    t = ((ip[0] - a[0]) * dx + (ip[1] - a[1]) * dy) / denom
                    cuts.append(max(0.0, min(1.0, t)))
    cuts = sorted(set(cuts))
    pieces: list[tuple[Coord, ...]] = []
    for i in range(len(cuts) - 1):
        t0, t1 = cuts[i], cuts[i + 1]
        if t1 - t0 <= 1e-12:
            continue
        tm = (t0 + t1) / 2.0
        mid = (a[0] + (b[0] - a[0]) * tm, a[1] + (b[1] - a[1]) * tm)
        if any(point_in_polygon(mid, p) for p in polys):
            p0 = (a[0] + (b[0] - a[0]) * t0, a[1] + (b[1] - a[1]) * t0)
            p1 = (a[0] + (b[0] - a[0]) * t1, a[1] + (b[1] - a[1]) * t1)
            pieces.append((p0, p1))
    return pieces
