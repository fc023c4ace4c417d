"""Session orchestration: the simulation tick loop, channel wiring, recording.

One Session owns a vehicle, the three channel links, the display compositor
state and the logs.  Every tick advances the shared clock by DT and, in order:
captures telemetry and camera frames (interval gated), delivers due messages,
updates the background selection, composes the display, logs, and steps the
vehicle with the most recently delivered command.  Headless runs are pure
functions of (config, operator): identical inputs reproduce byte-identical
records.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import MODES
from .channel import ChannelSet, payload_size_model, preset_by_name
from .compositor import (
    DEFAULT_HORIZON,
    BackgroundState,
    OverlaySet,
    RecordBuffer,
    ZoomState,
    build_overlays,
    compose_frame,
    frontcam_frame,
    select_background,
)
from .course import Course, default_course, load_course
from .geometry import CameraIntrinsics, CameraMount, CameraPose, Pose2D
from .metrics import CSV_HEADER, RunLog
from .operators import PurePursuitOperator
from .scene import SceneModel, render_scene, scene_from_course
from .vehicle import DT, ControlCommand, NoiseConfig, VehicleParams, VehicleState, localize, step


@dataclass(frozen=True)
class TelemetrySample:
    t: float
    pose: Pose2D
    speed: float
    steering: float


@dataclass(frozen=True)
class ImageSample:
    t: float
    frame: np.ndarray = field(repr=False)
    pose: Pose2D = Pose2D(0.0, 0.0, 0.0)
    camera: CameraPose | None = field(repr=False, default=None)
    fov: float = math.radians(60.0)
    size_bytes: int = 0


@dataclass
class SessionConfig:
    mode: str = "spir2"
    preset: str = "spir"
    seed: int = 0
    course_path: str | None = None
    realtime: bool = False
    capture_fov_deg: float = 60.0
    ratio_k: float = 0.2
    switch_threshold: float = 9.5
    min_record_distance: float = 6.5
    buffer_capacity: int = 24
    overlay_horizon: float = DEFAULT_HORIZON
    render_every: int = 1
    lookahead: float = 4.0
    target_speed: float = 0.9
    vehicle: VehicleParams = field(default_factory=VehicleParams)
    mount: CameraMount = field(default_factory=CameraMount)
    noise: NoiseConfig = field(default_factory=NoiseConfig)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; choose from {MODES}")
        if self.render_every < 1:
            raise ValueError("render_every must be >= 1")

    def resolved_seed(self) -> int:
        env = os.environ.get("SPIR_SEED")
        return int(env) if env is not None else self.seed

    def to_dict(self) -> dict:
        return asdict(self)

    @staticmethod
    def from_dict(data: dict) -> "SessionConfig":
        data = dict(data)
        for key, cls in (("vehicle", VehicleParams), ("mount", CameraMount), ("noise", NoiseConfig)):
            if key in data and isinstance(data[key], dict):
                data[key] = cls(**data[key])
        return SessionConfig(**data)


@dataclass
class SessionRecord:
    """Everything needed to audit or byte-identically replay a session."""

    config: dict
    commands: list[tuple[float, float, float, float]] = field(default_factory=list)  # send, deliver, throttle, steering
    runlog_rows: list[tuple[float, float, float, float, float, float, str]] = field(default_factory=list)
    diag_rows: list[dict] = field(default_factory=list)
    events: list[tuple[float, str, str]] = field(default_factory=list)

    DIAG_FIELDS = (
        "t",
        "mode",
        "record_id",
        "d",
        "theta",
        "sub_fraction",
        "switch_count",
        "cg_vmin",
        "cg_vmax",
        "delayed_t",
        "delayed_x",
        "delayed_y",
        "delayed_heading",
        "delayed_steering",
    )

    def runlog_csv(self) -> str:
        lines = [CSV_HEADER]
        for t, x, y, heading, speed, steering, mode in self.runlog_rows:
            lines.append(f"{t!r},{x!r},{y!r},{heading!r},{speed!r},{steering!r},{mode}")
        return "\n".join(lines) + "\n"

    def commands_csv(self) -> str:
        lines = ["send_time,deliver_time,throttle,steering"]
        for send, deliver, throttle, steering in self.commands:
            lines.append(f"{send!r},{deliver!r},{throttle!r},{steering!r}")
        return "\n".join(lines) + "\n"

    def diag_csv(self) -> str:
        lines = [",".join(self.DIAG_FIELDS)]
        for row in self.diag_rows:
            lines.append(",".join(_csv_cell(row.get(k)) for k in self.DIAG_FIELDS))
        return "\n".join(lines) + "\n"

    def events_csv(self) -> str:
        lines = ["t,kind,detail"]
        for t, kind, detail in self.events:
            lines.append(f"{t!r},{kind},{detail}")
        return "\n".join(lines) + "\n"

    def config_json(self) -> str:
        return json.dumps(self.config, sort_keys=True, indent=2) + "\n"

    def to_bytes(self) -> bytes:
        return (
            self.config_json() + self.commands_csv() + self.runlog_csv() + self.diag_csv() + self.events_csv()
        ).encode()

    def run_log(self) -> RunLog:
        rows = self.runlog_rows
        return RunLog(
            t=np.array([r[0] for r in rows]),
            x=np.array([r[1] for r in rows]),
            y=np.array([r[2] for r in rows]),
            heading=np.array([r[3] for r in rows]),
            speed=np.array([r[4] for r in rows]),
            steering=np.array([r[5] for r in rows]),
            mode=rows[0][6] if rows else "",
        )

    def save(self, out_dir: str | Path) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.json").write_text(self.config_json())
        (out / "commands.csv").write_text(self.commands_csv())
        (out / "runlog.csv").write_text(self.runlog_csv())
        (out / "diag.csv").write_text(self.diag_csv())
        (out / "events.csv").write_text(self.events_csv())

    @staticmethod
    def load(record_dir: str | Path) -> "SessionRecord":
        d = Path(record_dir)
        config = json.loads((d / "config.json").read_text())
        rec = SessionRecord(config)
        for line in (d / "commands.csv").read_text().splitlines()[1:]:
            send, deliver, throttle, steering = line.split(",")
            rec.commands.append((float(send), float(deliver), float(throttle), float(steering)))
        for line in (d / "runlog.csv").read_text().splitlines()[1:]:
            t, x, y, h, v, s, mode = line.split(",")
            rec.runlog_rows.append((float(t), float(x), float(y), float(h), float(v), float(s), mode))
        for line in (d / "diag.csv").read_text().splitlines()[1:]:
            cells = line.split(",")
            row: dict[str, Any] = {}
            for key, cell in zip(SessionRecord.DIAG_FIELDS, cells):
                if key == "mode":
                    row[key] = cell
                elif cell == "":
                    row[key] = None
                elif key in ("record_id", "switch_count"):
                    row[key] = int(cell)
                else:
                    row[key] = float(cell)
            rec.diag_rows.append(row)
        for line in (d / "events.csv").read_text().splitlines()[1:]:
            t, kind, detail = line.split(",", 2)
            rec.events.append((float(t), kind, detail))
        return rec


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


class Session:
    """One simulation instance; single-threaded stepping, isolated state."""

    def __init__(self, config: SessionConfig, course: Course | None = None, scene: SceneModel | None = None):
        self.config = config
        self.mode = config.mode
        self.seed = config.resolved_seed()
        self.course = course if course is not None else (load_course(config.course_path) if config.course_path else default_course())
        self.scene = scene if scene is not None else scene_from_course(self.course)
        self.preset = preset_by_name(config.preset)
        self.channels = ChannelSet.from_preset(self.preset, seed=self.seed)
        self.params = config.vehicle
        self.mount = config.mount
        self.capture_fov = math.radians(config.capture_fov_deg)
        self.intr = CameraIntrinsics(self.capture_fov, self.preset.image_width, self.preset.image_height)

        self.state = VehicleState(pose=self.course.start_pose)
        self.tick_index = 0
        self.applied_command = ControlCommand()

        self.buffer = RecordBuffer(config.buffer_capacity)
        self.background = BackgroundState(
            switch_threshold=config.switch_threshold,
            min_distance=config.min_record_distance,
        )
        self.zoom = ZoomState(
            body_height=self.params.body_height,
            ratio=config.ratio_k,
            capture_fov=self.capture_fov,
            min_distance=config.min_record_distance / 2.0,
        )

        self.delayed_telemetry: TelemetrySample | None = None
        self.latest_image: ImageSample | None = None
        self.display_frame: np.ndarray | None = None
        self.display_diag: dict | None = None

        cfg = config.to_dict()
        cfg["seed"] = self.seed
        self.record = SessionRecord(config=cfg)

        self._prev_station: float | None = None
        self._off_course = False
        self.laps_completed = 0

    # -- clock ---------------------------------------------------------------

    @property
    def sim_time(self) -> float:
        return self.tick_index * DT

    # -- external inputs -----------------------------------------------------

    def submit_command(self, throttle: float, steering: float) -> None:
        """Queue an operator command at the current sim time (live console path)."""
        cmd = ControlCommand(throttle, steering, timestamp=self.sim_time)
        msg = self.channels.command.inject(cmd, self.sim_time)
        self.record.commands.append((msg.send_time, msg.deliver_time, cmd.throttle, cmd.steering_target))

    def set_mode(self, mode: str) -> None:
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
        if mode != self.mode:
            self.mode = mode
            self.record.events.append((self.sim_time, "mode", mode))

    # -- tick ----------------------------------------------------------------

    def _capture_telemetry(self, t: float) -> None:
        state = self.state

        def produce() -> TelemetrySample:
            pose = localize(state, self.config.noise)
            return TelemetrySample(t, pose, state.speed, state.steering)

        self.channels.telemetry.maybe_capture(t, produce)

    def _capture_image(self, t: float) -> None:
        state = self.state

        def produce() -> ImageSample:
            pose = localize(state, self.config.noise)
            camera = CameraPose.from_pose(pose, self.mount)
            frame = render_scene(camera, self.intr, self.scene)
            size = payload_size_model(self.intr.width, self.intr.height, self.preset.jpeg_quality)
            return ImageSample(t, frame, pose, camera, self.capture_fov, size)

        self.channels.image.maybe_capture(t, produce)

    def _compose_display(self, t: float) -> None:
        diag: dict[str, Any] = {"t": t, "mode": self.mode}
        tele = self.delayed_telemetry
        if tele is not None:
            diag.update(
                delayed_t=tele.t,
                delayed_x=tele.pose.x,
                delayed_y=tele.pose.y,
                delayed_heading=tele.pose.heading,
                delayed_steering=tele.steering,
            )
        if self.mode == "front-camera":
            if self.latest_image is not None:
                self.display_frame = frontcam_frame(self.latest_image.frame)
                diag["record_id"] = -1
        elif self.background.active is not None and tele is not None:
            zoom = self.zoom if self.mode == "spir2" else None
            overlays: OverlaySet | None = None
            if self.mode == "spir2":
                motion = 1.0 if tele.speed >= 0 else -1.0
                overlays = build_overlays(
                    tele.steering,
                    self.params,
                    tele.pose,
                    horizon=self.config.overlay_horizon,
                    motion_sign=motion,
                )
            frame, cdiag = compose_frame(self.background, zoom, tele.pose, self.intr, self.params, overlays)
            self.display_frame = frame
            diag.update(cdiag)
        elif self.latest_image is not None:
            # No usable background yet: fall back to the raw latest frame.
            self.display_frame = self.latest_image.frame
            diag["record_id"] = -1
        self.display_diag = diag
        self.record.diag_rows.append(diag)

    def _track_course_events(self, t: float) -> None:
        dist, station = self.course.nearest(self.state.pose.x, self.state.pose.y)
        total = self.course.length()
        if self._prev_station is not None:
            if self._prev_station > 0.8 * total and station < 0.2 * total:
                self.laps_completed += 1
                self.record.events.append((t, "lap", str(self.laps_completed)))
        self._prev_station = station
        off = dist > self.course.road_half_width
        if off and not self._off_course:
            self.record.events.append((t, "course_departure", f"{dist:.3f}"))
        self._off_course = off

    def tick(self, operator: Callable[[TelemetrySample | None, dict | None], tuple[float, float]] | None = None) -> None:
        """Advance the session by one DT step."""
        t = self.sim_time

        self._capture_telemetry(t)
        self._capture_image(t)

        for sample in self.channels.telemetry.poll(t):
            self.delayed_telemetry = sample
        for sample in self.channels.image.poll(t):
            self.latest_image = sample
            # Records are stored in every mode so that mode switches are seamless.
            self.buffer.store(
                sample.frame,
                sample.pose,
                sample.t,
                sample.camera,
                sample.fov,
                active_id=self.background.active.record_id if self.background.active else None,
            )

        if len(self.buffer) > 0 and self.delayed_telemetry is not None:
            self.background = select_background(self.background, self.buffer, self.delayed_telemetry.pose, t)

        if operator is not None:
            throttle, steering = operator(self.delayed_telemetry, self.display_diag)

            def produce() -> ControlCommand:
                return ControlCommand(throttle, steering, timestamp=t)

            msg = self.channels.command.maybe_capture(t, produce)
            if msg is not None:
                cmd = msg.payload
                self.record.commands.append((msg.send_time, msg.deliver_time, cmd.throttle, cmd.steering_target))

        for cmd in self.channels.command.poll(t):
            self.applied_command = cmd

        if self.tick_index % self.config.render_every == 0:
            self._compose_display(t)

        pose = self.state.pose
        self.record.runlog_rows.append(
            (t, pose.x, pose.y, pose.heading, self.state.speed, self.state.steering, self.mode)
        )
        self._track_course_events(t)

        new_state = step(self.state, self.applied_command, DT, self.params)
        self.tick_index += 1
        self.state = replace(new_state, sim_time=self.sim_time)


def run_headless(
    config: SessionConfig,
    operator: Callable[[TelemetrySample | None, dict | None], tuple[float, float]] | None = None,
    duration: float | None = None,
    laps: int | None = None,
    max_duration: float = 1800.0,
) -> SessionRecord:
    """Run a session to a fixed horizon (duration seconds or completed laps)."""
    if duration is None and laps is None:
        raise ValueError("need duration or laps")
    session = Session(config)
    if operator is None:
        operator = PurePursuitOperator(
            session.course, config.vehicle, lookahead=config.lookahead, target_speed=config.target_speed
        ).command
    n_ticks = None if duration is None else int(round(duration / DT))
    hard_cap = int(round(max_duration / DT))
    while True:
        if n_ticks is not None and session.tick_index >= n_ticks:
            break
        if laps is not None and session.laps_completed >= laps:
            break
        if session.tick_index >= hard_cap:
            session.record.events.append((session.sim_time, "timeout", "max_duration reached"))
            break
        session.tick(operator)
    return session.record


def replay(record: SessionRecord) -> SessionRecord:
    """Re-run a recorded session from its config and command log."""
    config = SessionConfig.from_dict(record.config)
    session = Session(config)
    commands = sorted(record.commands)
    idx = 0
    n_ticks = len(record.runlog_rows)
    for _ in range(n_ticks):
        t = session.sim_time
        while idx < len(commands) and commands[idx][0] <= t + 1e-9:
            send, _deliver, throttle, steering = commands[idx]
            cmd = ControlCommand(throttle, steering, timestamp=send)
            msg = session.channels.command.inject(cmd, send)
            session.record.commands.append((msg.send_time, msg.deliver_time, cmd.throttle, cmd.steering_target))
            idx += 1
        session.tick(operator=None)
    return session.record
