"""Fixed-timestep kinematic vehicle (bicycle model) and simulated localization.

State integrates x' = v cos(psi), y' = v sin(psi), psi' = v tan(delta)/L with
a midpoint rule; speed and steering slew toward their command targets at
configured rates and are clamped to the declared bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .geometry import Pose2D, normalize_angle

# Simulation step, shared by the vehicle, channels and compositor clocks.
DT = 0.02


@dataclass(frozen=True)
class VehicleParams:
    wheelbase: float = 2.0
    track_width: float = 1.2
    body_height: float = 1.2  # CG-model height; drives the display zoom law
    max_speed: float = 1.0
    max_steering: float = math.radians(35.0)
    steering_rate: float = math.radians(45.0)  # rad/s toward target
    accel: float = 0.5  # m/s^2 toward target speed
    reverse_fraction: float = 0.5
    rear_overhang: float = 0.2
    front_overhang: float = 0.2
    body_margin: float = 0.2  # CG box width = track_width + margin

    def __post_init__(self):
        for name in ("wheelbase", "track_width", "body_height", "max_speed", "max_steering"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @property
    def body_length(self) -> float:
        return self.wheelbase + self.rear_overhang + self.front_overhang

    @property
    def body_width(self) -> float:
        return self.track_width + self.body_margin


@dataclass(frozen=True)
class VehicleState:
    pose: Pose2D
    speed: float = 0.0
    steering: float = 0.0
    sim_time: float = 0.0


@dataclass(frozen=True)
class ControlCommand:
    throttle: float = 0.0  # normalized [-1, 1]
    steering_target: float = 0.0  # radians
    timestamp: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "throttle", min(1.0, max(-1.0, self.throttle)))


def _slew(value: float, target: float, max_step: float) -> float:
    if target > value:
        return min(value + max_step, target)
    return max(value - max_step, target)


def step(state: VehicleState, cmd: ControlCommand, dt: float, params: VehicleParams) -> VehicleState:
    """Advance one fixed step: slew toward the command, then midpoint-integrate."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    steer_target = min(params.max_steering, max(-params.max_steering, cmd.steering_target))
    steering = _slew(state.steering, steer_target, params.steering_rate * dt)

    if cmd.throttle >= 0:
        speed_target = cmd.throttle * params.max_speed
    else:
        speed_target = cmd.throttle * params.max_speed * params.reverse_fraction
    speed = _slew(state.speed, speed_target, params.accel * dt)
    speed = min(params.max_speed, max(-params.max_speed * params.reverse_fraction, speed))

    yaw_rate = speed * math.tan(steering) / params.wheelbase
    psi_mid = state.pose.heading + 0.5 * dt * yaw_rate
    x = state.pose.x + dt * speed * math.cos(psi_mid)
    y = state.pose.y + dt * speed * math.sin(psi_mid)
    heading = normalize_angle(state.pose.heading + dt * yaw_rate)
    return VehicleState(
        pose=Pose2D(x, y, heading),
        speed=speed,
        steering=steering,
        sim_time=state.sim_time + dt,
    )


@dataclass(frozen=True)
class NoiseConfig:
    enabled: bool = False
    sigma_xy: float = 0.0
    sigma_heading: float = 0.0
    seed: int = 0


def localize(state: VehicleState, noise: NoiseConfig | None = None) -> Pose2D:
    """Report the vehicle pose, optionally with seeded zero-mean Gaussian noise.

    The draw is keyed on (seed, sim_time) so repeated calls at the same state
    return the identical noisy pose.
    """
    if noise is None or not noise.enabled:
        return state.pose
    tick = int(round(state.sim_time * 1e6))
    rng = np.random.default_rng((noise.seed, tick))
    dx, dy = rng.normal(0.0, noise.sigma_xy, size=2)
    dh = rng.normal(0.0, noise.sigma_heading) if noise.sigma_heading > 0 else 0.0
    return Pose2D(state.pose.x + dx, state.pose.y + dy, state.pose.heading + dh)


def body_corners(pose: Pose2D, params: VehicleParams) -> np.ndarray:
    """Ground-plane corners (4,2) of the CG body box at a pose.

    Vehicle frame: origin at the rear axle, +x forward; the box spans
    [-rear_overhang, wheelbase + front_overhang] x [-width/2, width/2].
    """
    x0 = -params.rear_overhang
    x1 = params.wheelbase + params.front_overhang
    half_w = params.body_width / 2.0
    pts = [(x0, -half_w), (x1, -half_w), (x1, half_w), (x0, half_w)]
    return np.array([pose.transform_point(px, py) for px, py in pts])


def cg_wireframe(pose: Pose2D, params: VehicleParams) -> list[np.ndarray]:
    """Wireframe edges of the CG box (12 segments, each (2,3) world points)."""
    base = body_corners(pose, params)
    h = params.body_height
    low = np.hstack([base, np.zeros((4, 1))])
    top = np.hstack([base, np.full((4, 1), h)])
    edges = []
    for i in range(4):
        j = (i + 1) % 4
        edges.append(np.array([low[i], low[j]]))
        edges.append(np.array([top[i], top[j]]))
        edges.append(np.array([low[i], top[i]]))
    return edges


def clamp_state(state: VehicleState, params: VehicleParams) -> VehicleState:
    return replace(
        state,
        speed=min(params.max_speed, max(-params.max_speed * params.reverse_fraction, state.speed)),
        steering=min(params.max_steering, max(-params.max_steering, state.steering)),
    )
