"""Exact 2D polygon kernel over rational coordinates.

Polygons live on a 224x224 reference canvas, vertices counter-clockwise,
coordinates are Fractions so areas, cuts and cover checks are tolerance-free.
Rigid transforms are restricted to quarter-turn rotations plus translation
(determinant +1, never a reflection).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import DegenerateCut

CANVAS = 224

# Rational stand-ins for tan(30deg) and tan(60deg); each is within 2e-6 of the
# true value (angle error < 1e-4 deg) and keeps every coordinate rational.
TAN = {
    0: Fraction(0),
    30: Fraction(571, 989),
    45: Fraction(1),
    60: Fraction(989, 571),
}
CUT_SLOPES = (0, 30, 45, 60)

ANCHOR_LO = Fraction(CANVAS, 4)    # 56
ANCHOR_HI = Fraction(3 * CANVAS, 4)  # 168

Point = tuple[Fraction, Fraction]


def _frac(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


class Polygon:
    """Simple polygon with exact rational vertices, stored counter-clockwise."""

    __slots__ = ("vertices", "_area2")

    def __init__(self, vertices, check_simple: bool = True):
        verts = [(_frac(x), _frac(y)) for x, y in vertices]
        if len(verts) < 3:
            raise ValueError("polygon needs at least 3 vertices")
        a2 = _signed_area2(verts)
        if a2 == 0:
            raise ValueError("polygon has zero area")
        if a2 < 0:
            verts.reverse()
            a2 = -a2
        # a convex CCW vertex loop cannot self-intersect; only fall back to
        # the quadratic segment test for non-convex input
        if check_simple and not _is_convex(verts) and not _is_simple(verts):
            raise ValueError("polygon is self-intersecting")
        self.vertices = tuple(verts)
        self._area2 = a2

    def __eq__(self, other):
        return isinstance(other, Polygon) and self.vertices == other.vertices

    def __hash__(self):
        return hash(self.vertices)

    def __repr__(self):
        pts = ", ".join(f"({float(x):.1f},{float(y):.1f})" for x, y in self.vertices)
        return f"Polygon[{pts}]"

    def bbox(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        xs = [v[0] for v in self.vertices]
        ys = [v[1] for v in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)

    def centroid(self) -> Point:
        a2 = Fraction(0)
        cx = Fraction(0)
        cy = Fraction(0)
        vs = self.vertices
        for i in range(len(vs)):
            x0, y0 = vs[i]
            x1, y1 = vs[(i + 1) % len(vs)]
            w = x0 * y1 - x1 * y0
            a2 += w
            cx += (x0 + x1) * w
            cy += (y0 + y1) * w
        return cx / (3 * a2), cy / (3 * a2)


def _signed_area2(verts) -> Fraction:
    s = Fraction(0)
    for i in range(len(verts)):
        x0, y0 = verts[i]
        x1, y1 = verts[(i + 1) % len(verts)]
        s += x0 * y1 - x1 * y0
    return s


def _segments_cross(p, q, r, s) -> bool:
    """Proper or improper intersection of open segments pq and rs, used only
    for the simplicity check between non-adjacent edges."""
    def orient(a, b, c):
        v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        return (v > 0) - (v < 0)

    def on_seg(a, b, c):
        return (min(a[0], b[0]) <= c[0] <= max(a[0], b[0])
                and min(a[1], b[1]) <= c[1] <= max(a[1], b[1]))

    o1, o2 = orient(p, q, r), orient(p, q, s)
    o3, o4 = orient(r, s, p), orient(r, s, q)
    if o1 != o2 and o3 != o4:
        return True
    if o1 == 0 and on_seg(p, q, r):
        return True
    if o2 == 0 and on_seg(p, q, s):
        return True
    if o3 == 0 and on_seg(r, s, p):
        return True
    if o4 == 0 and on_seg(r, s, q):
        return True
    return False


def _is_simple(verts) -> bool:
    n = len(verts)
    for i in range(n):
        a, b = verts[i], verts[(i + 1) % n]
        if a == b:
            return False
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            c, d = verts[j], verts[(j + 1) % n]
            if _segments_cross(a, b, c, d):
                return False
    return True


def _is_convex(verts) -> bool:
    n = len(verts)
    for i in range(n):
        ax, ay = verts[i]
        bx, by = verts[(i + 1) % n]
        cx, cy = verts[(i + 2) % n]
        if (bx - ax) * (cy - ay) - (by - ay) * (cx - ax) < 0:
            return False
    return True


def polygon_area(p: Polygon) -> Fraction:
    """Exact shoelace area (always positive; vertices are CCW)."""
    return p._area2 / 2


@dataclass(frozen=True)
class CutLine:
    """Line y = slope*x + anchor with slope one of the four allowed angles
    (optionally negated) passing through (0, anchor)."""

    slope_deg: int
    anchor: Fraction
    negate: bool = False

    def __post_init__(self):
        if self.slope_deg not in CUT_SLOPES:
            raise ValueError(f"slope angle must be one of {CUT_SLOPES}")
        object.__setattr__(self, "anchor", _frac(self.anchor))

    @property
    def slope(self) -> Fraction:
        s = TAN[self.slope_deg]
        return -s if self.negate else s

    def side(self, pt: Point) -> Fraction:
        """Positive above the line, negative below."""
        return pt[1] - (self.slope * pt[0] + self.anchor)


def _clip_halfplane(verts, side_fn, keep_positive: bool):
    """Sutherland-Hodgman clip of a convex polygon against one half-plane."""
    out = []
    n = len(verts)
    sides = [side_fn(v) for v in verts]
    if keep_positive:
        inside = [s >= 0 for s in sides]
    else:
        inside = [s <= 0 for s in sides]
    for i in range(n):
        a, b = verts[i], verts[(i + 1) % n]
        sa, sb = sides[i], sides[(i + 1) % n]
        if inside[i]:
            out.append(a)
        if inside[i] != inside[(i + 1) % n] and sa != sb:
            t = sa / (sa - sb)
            out.append((a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])))
    # drop consecutive duplicates
    dedup = []
    for v in out:
        if not dedup or v != dedup[-1]:
            dedup.append(v)
    if len(dedup) > 1 and dedup[0] == dedup[-1]:
        dedup.pop()
    return dedup


def cut_polygon(p: Polygon, line: CutLine) -> tuple[Polygon, Polygon]:
    """Split ``p`` along ``line`` into the region above and the region below.

    Raises DegenerateCut if either side is empty (the line misses the
    polygon) or a clipped side is not a simple polygon (a side that would
    be disconnected folds onto itself under half-plane clipping)."""
    above = _clip_halfplane(list(p.vertices), line.side, keep_positive=True)
    below = _clip_halfplane(list(p.vertices), line.side, keep_positive=False)
    if len(above) < 3 or len(below) < 3:
        raise DegenerateCut("cut line misses the polygon")
    if _signed_area2(above) == 0 or _signed_area2(below) == 0:
        raise DegenerateCut("cut produces a zero-area side")
    try:
        pa = Polygon(above)
        pb = Polygon(below)
    except ValueError as e:
        raise DegenerateCut(f"cut side not a simple polygon: {e}") from e
    if polygon_area(pa) + polygon_area(pb) != polygon_area(p):
        raise DegenerateCut("cut side disconnected (area not conserved)")
    return pa, pb


@dataclass(frozen=True)
class Placement:
    """Quarter-turn rotation about the origin followed by a translation."""

    rotation_deg: int
    translation: Point

    def __post_init__(self):
        if self.rotation_deg not in (0, 90, 180, 270):
            raise ValueError("rotation must be a multiple of 90 degrees")
        tx, ty = self.translation
        object.__setattr__(self, "translation", (_frac(tx), _frac(ty)))

    def apply(self, pt: Point) -> Point:
        x, y = pt
        r = self.rotation_deg
        if r == 90:
            x, y = -y, x
        elif r == 180:
            x, y = -x, -y
        elif r == 270:
            x, y = y, -x
        return x + self.translation[0], y + self.translation[1]


def transform_polygon(p: Polygon, pl: Placement) -> Polygon:
    """Rigid transform; preserves area, orientation and vertex count."""
    return Polygon([pl.apply(v) for v in p.vertices], check_simple=False)


def convex_intersection_area(a: Polygon, b: Polygon) -> Fraction:
    """Exact area of the intersection of two convex polygons."""
    verts = list(a.vertices)
    bv = b.vertices
    n = len(bv)
    for i in range(n):
        p0, p1 = bv[i], bv[(i + 1) % n]
        dx, dy = p1[0] - p0[0], p1[1] - p0[1]

        def side(pt, p0=p0, dx=dx, dy=dy):
            return dx * (pt[1] - p0[1]) - dy * (pt[0] - p0[0])

        verts = _clip_halfplane(verts, side, keep_positive=True)
        if len(verts) < 3:
            return Fraction(0)
    return abs(_signed_area2(verts)) / 2


def verify_cover(original: Polygon, pieces, placements) -> bool:
    """Exact check that the placed pieces tile ``original``.

    True iff the transformed pieces lie inside the original, have pairwise
    disjoint interiors, and their areas sum to the original's area.  All
    polygons must be convex (every polygon this package produces is)."""
    if len(pieces) != len(placements):
        raise ValueError("pieces and placements must pair up")
    placed = [transform_polygon(p, pl) for p, pl in zip(pieces, placements)]
    total = sum(polygon_area(p) for p in placed)
    if total != polygon_area(original):
        return False
    for p in placed:
        if convex_intersection_area(p, original) != polygon_area(p):
            return False
    for i in range(len(placed)):
        for j in range(i + 1, len(placed)):
            if convex_intersection_area(placed[i], placed[j]) != 0:
                return False
    return True


def piece_area_range(level_m: int) -> tuple[int, int]:
    """Allowed piece-area band per complexity level (number of pieces m)."""
    if level_m not in (2, 3, 4, 5):
        raise ValueError("composition level m must be in {2,3,4,5}")
    return (2000, 30000) if level_m == 5 else (3000, 30000)


def piece_area_in_range(p: Polygon, level_m: int) -> bool:
    lo, hi = piece_area_range(level_m)
    return lo <= polygon_area(p) <= hi


def canvas_square(size: int = CANVAS) -> Polygon:
    return Polygon([(0, 0), (size, 0), (size, size), (0, size)])
