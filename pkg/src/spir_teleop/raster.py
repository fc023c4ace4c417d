"""Minimal deterministic software raster: frame buffer, lines, polygon fill, PPM io.

Frames are numpy uint8 arrays of shape (height, width, 3), RGB order.  All
drawing is integer-stamped (no anti-aliasing) so identical inputs always
produce byte-identical buffers.
"""

from __future__ import annotations

import math

import numpy as np

Color = tuple[int, int, int]

# Pixel offsets stamped around each sample for thickness 2 (a 2x2 footprint).
_THICK_OFFSETS = {
    1: np.array([[0, 0]]),
    2: np.array([[0, 0], [1, 0], [0, 1], [1, 1]]),
    3: np.array([[0, 0], [1, 0], [-1, 0], [0, 1], [0, -1], [1, 1], [-1, 1], [1, -1], [-1, -1]]),
}


def new_frame(width: int, height: int, color: Color) -> np.ndarray:
    frame = np.empty((height, width, 3), dtype=np.uint8)
    frame[:] = color
    return frame


def draw_segments(frame: np.ndarray, segments, color: Color, thickness: int = 1) -> None:
    """Stamp a batch of pixel-space segments in place.

    `segments` is an (N,2,2) array of [[u0,v0],[u1,v1]] rows (or an
    equivalent nested sequence).  Each segment is sampled at ~1px steps; all
    samples across the batch are rounded and written in one vectorized pass.
    """
    seg = np.asarray(segments, dtype=float)
    if seg.size == 0:
        return
    h, w = frame.shape[:2]
    p0 = seg[:, 0, :]
    p1 = seg[:, 1, :]
    ok = np.isfinite(p0).all(axis=1) & np.isfinite(p1).all(axis=1)
    if not np.any(ok):
        return
    p0, p1 = p0[ok], p1[ok]
    # Liang-Barsky clip to a small guard box around the frame so sampling
    # stays bounded even for segments projecting far off-screen.
    pad = 4.0
    d = p1 - p0
    t0 = np.zeros(len(p0))
    t1 = np.ones(len(p0))
    keep = np.ones(len(p0), dtype=bool)
    for axis, lo, hi in ((0, -pad, w + pad), (1, -pad, h + pad)):
        for sgn, q in ((-1.0, p0[:, axis] - lo), (1.0, hi - p0[:, axis])):
            p = sgn * d[:, axis]
            r = np.divide(q, p, out=np.zeros_like(q), where=p != 0)
            ent = p < 0
            ext = p > 0
            t0 = np.where(ent, np.maximum(t0, r), t0)
            t1 = np.where(ext, np.minimum(t1, r), t1)
            keep &= ~((p == 0) & (q < 0))
    keep &= t0 <= t1
    if not np.any(keep):
        return
    base = p0[keep]
    dk = d[keep]
    p0 = base + t0[keep, None] * dk
    p1 = base + t1[keep, None] * dk
    d = p1 - p0
    n = np.maximum(np.abs(d[:, 0]), np.abs(d[:, 1])).astype(np.int64) + 1
    total = int(n.sum())
    seg = np.repeat(np.arange(len(n)), n)
    off = np.arange(total) - np.repeat(np.cumsum(n) - n, n)
    t = off / np.maximum(n[seg] - 1, 1)
    pts = p0[seg] + d[seg] * t[:, None]
    ij = np.rint(pts).astype(np.int64)
    offs = _THICK_OFFSETS.get(thickness, _THICK_OFFSETS[1])
    ij = (ij[:, None, :] + offs[None, :, :]).reshape(-1, 2)
    m = (ij[:, 0] >= 0) & (ij[:, 0] < w) & (ij[:, 1] >= 0) & (ij[:, 1] < h)
    ij = ij[m]
    frame[ij[:, 1], ij[:, 0]] = color


def fill_polygon(frame: np.ndarray, vertices, color: Color) -> None:
    """Scanline-fill a pixel-space polygon (Nx2, possibly concave) in place.

    Even-odd rule; rows are filled between sorted edge crossings sampled at
    pixel-row centers (v + 0.5).
    """
    v = np.asarray(vertices, dtype=float)
    if len(v) < 3 or not np.isfinite(v).all():
        return
    h, w = frame.shape[:2]
    y0 = max(0, int(math.floor(v[:, 1].min())))
    y1 = min(h - 1, int(math.ceil(v[:, 1].max())))
    if y1 < y0:
        return
    xs0, ys0 = v[:, 0], v[:, 1]
    xs1 = np.roll(xs0, -1)
    ys1 = np.roll(ys0, -1)
    for row in range(y0, y1 + 1):
        yc = row + 0.5
        hits = ((ys0 <= yc) & (ys1 > yc)) | ((ys1 <= yc) & (ys0 > yc))
        if not np.any(hits):
            continue
        t = (yc - ys0[hits]) / (ys1[hits] - ys0[hits])
        cross = np.sort(xs0[hits] + t * (xs1[hits] - xs0[hits]))
        for i in range(0, len(cross) - 1, 2):
            a = max(0, int(math.ceil(cross[i] - 0.5)))
            b = min(w - 1, int(math.floor(cross[i + 1] - 0.5)))
            if b >= a:
                frame[row, a : b + 1] = color


def write_ppm(frame: np.ndarray) -> bytes:
    h, w = frame.shape[:2]
    return b"P6\n%d %d\n255\n" % (w, h) + frame.tobytes()


def read_ppm(data: bytes) -> np.ndarray:
    if not data.startswith(b"P6"):
        raise ValueError("not a binary PPM (P6) buffer")
    fields = []
    pos = 2
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        fields.append(int(data[start:pos]))
    pos += 1
    w, h, maxval = fields
    if maxval != 255:
        raise ValueError(f"unsupported maxval {maxval}")
    raw = data[pos : pos + w * h * 3]
    if len(raw) != w * h * 3:
        raise ValueError("truncated PPM payload")
    return np.frombuffer(raw, dtype=np.uint8).reshape(h, w, 3).copy()
