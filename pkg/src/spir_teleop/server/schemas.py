"""Pydantic models for the wire protocol and the REST surface.

WebSocket messages are JSON objects, one per message, discriminated by
"type": frame (server->client), cmd / mode / config (client->server, config
echoed back), end (server->client on a fixed-horizon session).
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

from .. import MODES

Mode = Literal["front-camera", "spir-existing", "spir2"]


class Diag(BaseModel):
    record_id: Optional[int] = None
    d: Optional[float] = None
    theta: Optional[float] = None
    sub_fraction: Optional[float] = None
    switch_count: Optional[int] = None
    delayed_t: Optional[float] = None


class FrameMessage(BaseModel):
    type: Literal["frame"] = "frame"
    t: float
    png_or_ppm_b64: str
    mode: Mode
    diag: Diag = Field(default_factory=Diag)


class CmdMessage(BaseModel):
    type: Literal["cmd"] = "cmd"
    throttle: float = Field(0.0, ge=-1.0, le=1.0)
    steering: float = 0.0


class ModeMessage(BaseModel):
    type: Literal["mode"] = "mode"
    value: Mode


class ConfigMessage(BaseModel):
    type: Literal["config"] = "config"
    mode: Optional[Mode] = None
    preset: Optional[str] = None
    seed: Optional[int] = None
    duration: Optional[float] = None
    send_every: Optional[int] = Field(None, ge=1)
    realtime: Optional[bool] = None
    image_interval: Optional[float] = None  # echoed for client staleness logic
    max_steering: Optional[float] = None


class EndMessage(BaseModel):
    type: Literal["end"] = "end"
    t: float
    frames_sent: int


class HealthResponse(BaseModel):
    status: Literal["ok"] = "ok"
    version: str


class ModesResponse(BaseModel):
    modes: list[str] = list(MODES)


class PresetInfo(BaseModel):
    name: str
    jpeg_quality: int
    image_width: int
    image_height: int
    image_interval: float
    image_delay: float
    data_interval: float
    data_delay: float
    command_delay: float


class RunRequest(BaseModel):
    mode: Mode = "spir2"
    preset: str = "spir"
    duration: Optional[float] = Field(None, gt=0.0, le=1800.0)
    laps: Optional[int] = Field(None, ge=1, le=5)
    seed: int = 0
    render_every: int = Field(10, ge=1)
    target_speed: float = Field(0.9, gt=0.0, le=1.0)


class RunResponse(BaseModel):
    mode: Mode
    samples: int
    sim_duration: float
    average_speed: float
    position_error_sum: float
    position_error_mean: float
    laps: int
    switches: int
    events: list[str]


class StatsRequest(BaseModel):
    measurements: list[list[float]]  # subjects x systems
    labels: Optional[list[str]] = None
    alpha: float = Field(0.05, gt=0.0, lt=1.0)


class PairResult(BaseModel):
    a: str
    b: str
    difference: float
    threshold: float
    significant: bool


class StatsResponse(BaseModel):
    ss_a: float
    ss_sub: float
    ss_sxa: float
    ss_total: float
    df_a: int
    df_sub: int
    df_sxa: int
    ms_a: float
    ms_sxa: float
    f: float
    lsd_threshold: float
    pairs: list[PairResult]
    table_text: str
