"""Closed driving course: centerline polyline, road width, start pose, file io.

Course file format (plain text):
    halfwidth <meters>
    <x> <y>          one vertex per line, meters; the loop closes implicitly
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .geometry import Pose2D


@dataclass(frozen=True)
class Course:
    """Closed centerline (N,2), implicitly closed last->first."""

    centerline: np.ndarray = field(repr=False)
    road_half_width: float = 3.0

    def __post_init__(self):
        if len(self.centerline) < 3:
            raise ValueError("course needs at least 3 vertices")

    @property
    def start_pose(self) -> Pose2D:
        p0 = self.centerline[0]
        p1 = self.centerline[1]
        return Pose2D(float(p0[0]), float(p0[1]), math.atan2(p1[1] - p0[1], p1[0] - p0[0]))

    @property
    def segments(self) -> tuple[np.ndarray, np.ndarray]:
        """(start points, end points) of all closed-loop segments."""
        return self._geom[0], self._geom[1]

    @cached_property
    def _geom(self):
        a = self.centerline
        b = np.roll(self.centerline, -1, axis=0)
        d = b - a
        seg_len2 = np.maximum(np.einsum("ij,ij->i", d, d), 1e-18)
        seg_len = np.sqrt(seg_len2)
        stations = np.concatenate([[0.0], np.cumsum(seg_len)])
        return a, b, d, seg_len2, seg_len, stations

    def length(self) -> float:
        return float(self._geom[5][-1])

    def bounding_box(self) -> tuple[float, float]:
        ext = self.centerline.max(axis=0) - self.centerline.min(axis=0)
        return (float(ext[0]), float(ext[1]))

    def nearest(self, x: float, y: float) -> tuple[float, float]:
        """(distance to centerline, arc-length station of the nearest point)."""
        a, _, d, seg_len2, seg_len, stations = self._geom
        p = np.array([x, y])
        t = np.clip(np.einsum("ij,ij->i", p - a, d) / seg_len2, 0.0, 1.0)
        proj = a + t[:, None] * d
        dist2 = np.einsum("ij,ij->i", proj - p, proj - p)
        i = int(np.argmin(dist2))
        return float(math.sqrt(dist2[i])), float(stations[i] + t[i] * seg_len[i])

    def point_at_station(self, s: float) -> tuple[float, float]:
        """Point on the centerline at arc length s (wraps around the loop)."""
        a, b, _, _, seg_len, stations = self._geom
        total = stations[-1]
        s = s % total
        i = int(np.searchsorted(stations, s, side="right") - 1)
        i = min(i, len(seg_len) - 1)
        t = (s - stations[i]) / max(seg_len[i], 1e-18)
        p = a[i] + t * (b[i] - a[i])
        return (float(p[0]), float(p[1]))


def default_course() -> Course:
    """Built-in closed loop: a rounded rectangle, ~250 m long, within 120x80 m.

    Corner radius is kept large so that viewpoints trailing the vehicle by up
    to the background-switch distance still frame it on curves.
    """
    r = 28.0
    ax = 24.0  # straight length along x
    ay = 13.0  # straight length along y
    pts: list[tuple[float, float]] = []

    def arc(cx, cy, a0, a1, n):
        for k in range(n):
            t = a0 + (a1 - a0) * k / n
            pts.append((cx + r * math.cos(t), cy + r * math.sin(t)))

    hx, hy = ax / 2.0, ay / 2.0
    n_arc = 40
    # Start on the bottom straight heading +x; counterclockwise loop.
    pts.append((-hx, -hy - r))
    pts.append((hx, -hy - r))
    arc(hx, -hy, -math.pi / 2, 0.0, n_arc)
    pts.append((hx + r, hy))
    arc(hx, hy, 0.0, math.pi / 2, n_arc)
    pts.append((-hx, hy + r))
    arc(-hx, hy, math.pi / 2, math.pi, n_arc)
    pts.append((-hx - r, -hy))
    arc(-hx, -hy, math.pi, 1.5 * math.pi, n_arc)
    # Deduplicate consecutive points that coincide (arc endpoints).
    out = [pts[0]]
    for p in pts[1:]:
        if math.hypot(p[0] - out[-1][0], p[1] - out[-1][1]) > 1e-9:
            out.append(p)
    if math.hypot(out[-1][0] - out[0][0], out[-1][1] - out[0][1]) < 1e-9:
        out.pop()
    return Course(np.array(out, dtype=float), road_half_width=3.0)


def save_course(course: Course, path: str | Path) -> None:
    lines = [f"halfwidth {float(course.road_half_width)!r}"]
    for x, y in course.centerline:
        lines.append(f"{float(x)!r} {float(y)!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_course(path: str | Path) -> Course:
    text = Path(path).read_text()
    half = None
    verts = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("halfwidth"):
            half = float(line.split()[1])
            continue
        x, y = line.split()[:2]
        verts.append((float(x), float(y)))
    if half is None:
        raise ValueError(f"{path}: missing 'halfwidth' header")
    return Course(np.array(verts, dtype=float), road_half_width=half)
