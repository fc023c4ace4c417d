"""Scripted operators for headless runs.

Operators stand in for a human driver and act only on information that
crossed the emulated channels: the latest delayed telemetry sample and the
composited display metadata.  They never read ground-truth state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

from .course import Course
from .vehicle import VehicleParams


@dataclass
class PurePursuitOperator:
    """Pure-pursuit tracker on the course centerline, fed by delayed telemetry."""

    course: Course
    params: VehicleParams
    lookahead: float = 4.0
    target_speed: float = 0.9

    def command(self, telemetry: Any | None, display_meta: dict | None = None) -> tuple[float, float]:
        """Return (throttle, steering_target) for the current tick."""
        if telemetry is None:
            return (0.0, 0.0)
        pose = telemetry.pose
        _, station = self.course.nearest(pose.x, pose.y)
        gx, gy = self.course.point_at_station(station + self.lookahead)
        # Goal point in the (delayed) vehicle frame.
        dx, dy = gx - pose.x, gy - pose.y
        c, s = math.cos(pose.heading), math.sin(pose.heading)
        lx = c * dx + s * dy
        ly = -s * dx + c * dy
        alpha = math.atan2(ly, lx)
        steering = math.atan2(2.0 * self.params.wheelbase * math.sin(alpha), self.lookahead)
        steering = min(self.params.max_steering, max(-self.params.max_steering, steering))
        throttle = min(1.0, self.target_speed / self.params.max_speed)
        return (throttle, steering)
