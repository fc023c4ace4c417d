"""Per-run trial metrics: average speed and centerline position error.

A RunLog is the ground-truth trajectory sampled at the telemetry rate; it is
persisted as CSV with header "t,x,y,heading,speed,steering,mode".
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .course import Course

CSV_HEADER = "t,x,y,heading,speed,steering,mode"


class EmptyLogError(ValueError):
    pass


@dataclass
class RunLog:
    t: np.ndarray = field(default_factory=lambda: np.empty(0))
    x: np.ndarray = field(default_factory=lambda: np.empty(0))
    y: np.ndarray = field(default_factory=lambda: np.empty(0))
    heading: np.ndarray = field(default_factory=lambda: np.empty(0))
    speed: np.ndarray = field(default_factory=lambda: np.empty(0))
    steering: np.ndarray = field(default_factory=lambda: np.empty(0))
    mode: str = ""

    def __len__(self) -> int:
        return len(self.t)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(CSV_HEADER + "\n")
        for i in range(len(self.t)):
            buf.write(
                f"{float(self.t[i])!r},{float(self.x[i])!r},{float(self.y[i])!r},{float(self.heading[i])!r},"
                f"{float(self.speed[i])!r},{float(self.steering[i])!r},{self.mode}\n"
            )
        return buf.getvalue()

    @staticmethod
    def from_csv(text: str) -> "RunLog":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0] != CSV_HEADER:
            raise ValueError("not a run log CSV")
        rows = [ln.split(",") for ln in lines[1:]]
        if not rows:
            return RunLog()
        cols = list(zip(*rows))
        return RunLog(
            t=np.array([float(v) for v in cols[0]]),
            x=np.array([float(v) for v in cols[1]]),
            y=np.array([float(v) for v in cols[2]]),
            heading=np.array([float(v) for v in cols[3]]),
            speed=np.array([float(v) for v in cols[4]]),
            steering=np.array([float(v) for v in cols[5]]),
            mode=cols[6][0] if rows else "",
        )

    @staticmethod
    def load(path: str | Path) -> "RunLog":
        return RunLog.from_csv(Path(path).read_text())


def average_speed(log: RunLog) -> float:
    """Total path length over elapsed time."""
    if len(log) < 2 or log.t[-1] <= log.t[0]:
        raise EmptyLogError("log must span a positive duration")
    dx = np.diff(log.x)
    dy = np.diff(log.y)
    path = float(np.hypot(dx, dy).sum())
    return path / float(log.t[-1] - log.t[0])


def nearest_centerline_distances(log: RunLog, course: Course) -> np.ndarray:
    """Exact nearest distance from each sample to the closed centerline."""
    if len(log) == 0:
        raise EmptyLogError("empty log")
    a, b = course.segments
    d = b - a
    len2 = np.maximum(np.einsum("ij,ij->i", d, d), 1e-18)
    p = np.stack([log.x, log.y], axis=1)
    # (samples, segments) projection parameter, clamped to the segment.
    t = np.einsum("sj,ij->si", p, d) - np.einsum("ij,ij->i", a, d)
    t = np.clip(t / len2, 0.0, 1.0)
    proj = a[None, :, :] + t[:, :, None] * d[None, :, :]
    dist = np.linalg.norm(proj - p[:, None, :], axis=2)
    return dist.min(axis=1)


def position_error(log: RunLog, course: Course) -> tuple[float, float]:
    """(sum, mean) of nearest distances from samples to the centerline."""
    dists = nearest_centerline_distances(log, course)
    return float(dists.sum()), float(dists.mean())
