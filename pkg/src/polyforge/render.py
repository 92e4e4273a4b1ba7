"""Deterministic software rasterizer and PNG codec.

3D polyominoes are drawn with an orthographic camera after the two viewing
rotations (vertical about x, then horizontal about y), flat-shaded by face
axis, with painter's-algorithm occlusion.  2D polygons are filled black on
white with an area-conserving scanline so the black-pixel count tracks the
exact polygon area to within one pixel.  No anti-aliasing anywhere; every
render is a pure function of its inputs.
"""

from __future__ import annotations

import math
import struct
import zlib
from dataclasses import dataclass

import numpy as np

from .planar import CANVAS, Polygon
from .rotation import PoseAngles

WHITE = 255
STYLE_VERSION = "flat-3shade-v1"


@dataclass(frozen=True)
class RenderStyle:
    """Face shades keyed by the face normal's object-space axis (x, y, z)."""

    shades: tuple[int, int, int] = (150, 200, 245)
    outline: bool = True
    outline_level: int = 40
    margin: float = 0.08

    def __post_init__(self):
        if len(set(self.shades)) != 3:
            raise ValueError("the three face shades must be pairwise distinct")
        if not 0 <= self.margin < 0.3:
            raise ValueError("margin fraction must lie in [0, 0.3)")


DEFAULT_STYLE = RenderStyle()


def blank(size: int) -> np.ndarray:
    return np.full((size, size), WHITE, dtype=np.uint8)


# ---------------------------------------------------------------------------
# polygon rasterization (area-conserving scanline)
# ---------------------------------------------------------------------------

def _row_spans(verts: np.ndarray, ts: np.ndarray):
    """Left/right boundary x at each horizontal line y=t of a convex polygon
    (NaN where the line misses it)."""
    n = len(verts)
    xl = np.full(ts.shape, np.inf)
    xr = np.full(ts.shape, -np.inf)
    for i in range(n):
        x0, y0 = verts[i]
        x1, y1 = verts[(i + 1) % n]
        if y0 == y1:
            continue
        lo, hi = (y0, y1) if y0 < y1 else (y1, y0)
        mask = (ts >= lo) & (ts <= hi)
        if not mask.any():
            continue
        x = x0 + (ts[mask] - y0) * (x1 - x0) / (y1 - y0)
        np.minimum.at(xl, np.nonzero(mask)[0], x)
        np.maximum.at(xr, np.nonzero(mask)[0], x)
    missing = xl > xr
    xl[missing] = np.nan
    xr[missing] = np.nan
    return xl, xr


def render_polygon(p: Polygon, size: int = CANVAS) -> np.ndarray:
    """Fill ``p`` black on a white canvas.

    Rows get pixel counts by rounding the cumulative strip area, so the
    total black-pixel count equals the exact scaled area to within one
    pixel while edges stay straight."""
    scale = size / CANVAS
    verts = np.array([(float(x) * scale, float(y) * scale) for x, y in p.vertices])
    img = blank(size)

    # width of the polygon at every integer line and every vertex height
    ys = np.unique(np.concatenate([np.arange(size + 1, dtype=float), verts[:, 1]]))
    ys = ys[(ys >= 0) & (ys <= size)]
    # width is linear on each open interval between breakpoints but can jump
    # at a horizontal edge, so sample it at interval midpoints (the midpoint
    # rule is exact for a linear integrand)
    mids = 0.5 * (ys[1:] + ys[:-1])
    xl, xr = _row_spans(verts, mids)
    widths = np.where(np.isnan(xl), 0.0, xr - xl)
    cum = np.concatenate([[0.0], np.cumsum(widths * np.diff(ys))])
    grid_idx = np.searchsorted(ys, np.arange(size + 1, dtype=float))
    cum_rows = cum[grid_idx]

    centers = np.arange(size, dtype=float) + 0.5
    cl, cr = _row_spans(verts, centers)
    ymin, ymax = verts[:, 1].min(), verts[:, 1].max()

    counts = np.round(cum_rows[1:]) - np.round(cum_rows[:-1])
    for y in range(size):
        n = int(counts[y])
        if n <= 0:
            continue
        if np.isnan(cl[y]):
            # apex strip: the row center misses the polygon; centre the run
            # on the nearest covered height
            t = min(max(centers[y], ymin + 1e-9), ymax - 1e-9)
            axl, axr = _row_spans(verts, np.array([t]))
            mid = (axl[0] + axr[0]) / 2
        else:
            mid = (cl[y] + cr[y]) / 2
        start = int(math.floor(mid - n / 2 + 0.5))
        start = max(0, min(start, size - n))
        img[y, start:start + n] = 0
    return img


# ---------------------------------------------------------------------------
# polyomino rendering
# ---------------------------------------------------------------------------

_FACE_DIRS = (
    (1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1),
)

# corner offsets of the cube face pointing in each direction, CCW seen from outside
_FACE_CORNERS = {
    (1, 0, 0): ((1, 0, 0), (1, 1, 0), (1, 1, 1), (1, 0, 1)),
    (-1, 0, 0): ((0, 0, 0), (0, 0, 1), (0, 1, 1), (0, 1, 0)),
    (0, 1, 0): ((0, 1, 0), (0, 1, 1), (1, 1, 1), (1, 1, 0)),
    (0, -1, 0): ((0, 0, 0), (1, 0, 0), (1, 0, 1), (0, 0, 1)),
    (0, 0, 1): ((0, 0, 1), (1, 0, 1), (1, 1, 1), (0, 1, 1)),
    (0, 0, -1): ((0, 0, 0), (0, 1, 0), (1, 1, 0), (1, 0, 0)),
}


def pose_matrix(pose: PoseAngles) -> np.ndarray:
    """Rotation by alpha_v about the horizontal (x) axis, then alpha_h about
    the vertical (y) axis."""
    av = math.radians(pose.alpha_v)
    ah = math.radians(pose.alpha_h)
    rx = np.array([[1, 0, 0],
                   [0, math.cos(av), -math.sin(av)],
                   [0, math.sin(av), math.cos(av)]])
    ry = np.array([[math.cos(ah), 0, math.sin(ah)],
                   [0, 1, 0],
                   [-math.sin(ah), 0, math.cos(ah)]])
    return ry @ rx


def _visible_faces(blocks, rot: np.ndarray):
    """Rotated corner coordinates of every exterior, camera-facing face,
    sorted far-to-near for the painter's algorithm."""
    blockset = set(blocks)
    faces = []
    for b in sorted(blockset):
        for axis, d in enumerate(_FACE_DIRS):
            nb = (b[0] + d[0], b[1] + d[1], b[2] + d[2])
            if nb in blockset:
                continue
            corners = np.array(
                [[b[0] + c[0], b[1] + c[1], b[2] + c[2]] for c in _FACE_CORNERS[d]],
                dtype=float,
            )
            rc = corners @ rot.T
            normal = rot @ np.array(d, dtype=float)
            if normal[2] <= 1e-12:
                continue  # back-facing (camera looks along -z)
            faces.append((rc, axis // 2, float(rc[:, 2].mean()), (b, axis)))
    faces.sort(key=lambda f: (f[2], f[3]))
    return faces


def _fill_quad(img: np.ndarray, pts: np.ndarray, value: int, outline: int | None = None):
    """Pixel-center fill of a convex quad given in image coordinates.

    With ``outline`` set, inside pixels less than one pixel from a quad edge
    take the outline value instead."""
    size = img.shape[0]
    x0 = max(int(math.floor(pts[:, 0].min())), 0)
    x1 = min(int(math.ceil(pts[:, 0].max())), size)
    y0 = max(int(math.floor(pts[:, 1].min())), 0)
    y1 = min(int(math.ceil(pts[:, 1].max())), size)
    if x0 >= x1 or y0 >= y1:
        return
    xx = np.arange(x0, x1, dtype=float)[None, :] + 0.5
    yy = np.arange(y0, y1, dtype=float)[:, None] + 0.5
    n = len(pts)
    # orientation of the projected quad
    area2 = 0.0
    for i in range(n):
        ax, ay = pts[i]
        bx, by = pts[(i + 1) % n]
        area2 += ax * by - bx * ay
    sign = 1.0 if area2 >= 0 else -1.0
    dist = None  # signed pixel distance to the nearest edge, per pixel
    for i in range(n):
        ax, ay = pts[i]
        bx, by = pts[(i + 1) % n]
        length = max(math.hypot(bx - ax, by - ay), 1e-9)
        d = sign * ((bx - ax) * (yy - ay) - (by - ay) * (xx - ax)) / length
        dist = d if dist is None else np.minimum(dist, d)
    inside = dist >= 0
    window = img[y0:y1, x0:x1]
    window[inside] = value
    if outline is not None:
        window[inside & (dist < 1.0)] = outline


def render_polyomino(
    blocks,
    pose: PoseAngles,
    style: RenderStyle = DEFAULT_STYLE,
    size: int = CANVAS,
) -> np.ndarray:
    """Orthographic view of a block set under the given pose."""
    cubes = blocks.blocks if hasattr(blocks, "blocks") else blocks
    rot = pose_matrix(pose)
    faces = _visible_faces(cubes, rot)

    all_pts = np.concatenate([f[0][:, :2] for f in faces], axis=0)
    lo = all_pts.min(axis=0)
    hi = all_pts.max(axis=0)
    span = max(hi[0] - lo[0], hi[1] - lo[1], 1e-9)
    scale = size * (1 - 2 * style.margin) / span
    cx, cy = (lo + hi) / 2

    img = blank(size)
    for rc, axis, _depth, _key in faces:
        px = (rc[:, 0] - cx) * scale + size / 2
        py = size / 2 - (rc[:, 1] - cy) * scale
        pts = np.stack([px, py], axis=1)
        outline = style.outline_level if style.outline else None
        _fill_quad(img, pts, style.shades[axis], outline)
    return img


# ---------------------------------------------------------------------------
# preprocessing and PNG I/O
# ---------------------------------------------------------------------------

def pad_and_rescale(img: np.ndarray, margin: int) -> np.ndarray:
    """Add a white border of ``margin`` pixels on every side, then rescale
    back to the input dimensions with nearest-neighbor sampling."""
    if margin < 0:
        raise ValueError("margin must be >= 0")
    if margin == 0:
        return img.copy()
    h, w = img.shape
    padded = np.full((h + 2 * margin, w + 2 * margin), WHITE, dtype=np.uint8)
    padded[margin:margin + h, margin:margin + w] = img
    rows = (np.arange(h) * padded.shape[0]) // h
    cols = (np.arange(w) * padded.shape[1]) // w
    return padded[np.ix_(rows, cols)]


def _chunk(tag: bytes, payload: bytes) -> bytes:
    return (
        struct.pack(">I", len(payload))
        + tag
        + payload
        + struct.pack(">I", zlib.crc32(tag + payload))
    )


def encode_png(img: np.ndarray) -> bytes:
    """8-bit grayscale PNG with fixed encoder settings (bit-stable output)."""
    if img.dtype != np.uint8 or img.ndim != 2:
        raise ValueError("expected a 2-D uint8 image")
    h, w = img.shape
    raw = b"".join(b"\x00" + img[y].tobytes() for y in range(h))
    ihdr = struct.pack(">IIBBBBB", w, h, 8, 0, 0, 0, 0)
    return (
        b"\x89PNG\r\n\x1a\n"
        + _chunk(b"IHDR", ihdr)
        + _chunk(b"IDAT", zlib.compress(raw, 6))
        + _chunk(b"IEND", b"")
    )


def decode_png(data: bytes) -> np.ndarray:
    """Decode PNGs produced by :func:`encode_png` (filter type 0 only)."""
    if data[:8] != b"\x89PNG\r\n\x1a\n":
        raise ValueError("not a PNG stream")
    pos = 8
    w = h = None
    idat = b""
    while pos < len(data):
        (length,) = struct.unpack(">I", data[pos:pos + 4])
        tag = data[pos + 4:pos + 8]
        payload = data[pos + 8:pos + 8 + length]
        if tag == b"IHDR":
            w, h, depth, ctype = struct.unpack(">IIBB", payload[:10])
            if depth != 8 or ctype != 0:
                raise ValueError("only 8-bit grayscale supported")
        elif tag == b"IDAT":
            idat += payload
        pos += 12 + length
    raw = zlib.decompress(idat)
    img = np.empty((h, w), dtype=np.uint8)
    stride = w + 1
    for y in range(h):
        row = raw[y * stride:(y + 1) * stride]
        if row[0] != 0:
            raise ValueError(f"unsupported PNG filter type {row[0]}")
        img[y] = np.frombuffer(row[1:], dtype=np.uint8)
    return img


def write_png(path, img: np.ndarray) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_png(img))
