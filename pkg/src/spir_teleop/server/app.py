"""FastAPI service wrapping the simulator core.

REST endpoints expose health, presets, headless runs and the trial
statistics; the WebSocket endpoint `/ws` runs live sessions for the operator
console.  Each console session is isolated; a dropped connection pauses its
session (zero throttle injected) until the client reconnects with the same
session name.
"""

from __future__ import annotations

import asyncio
import base64
import time
from dataclasses import replace
from pathlib import Path

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles

from .. import __version__
from ..channel import PRESETS
from ..metrics import average_speed, position_error
from ..raster import write_ppm
from ..session import Session, SessionConfig, run_headless
from ..stats import TrialMatrix, anova_table_text, lsd_threshold, pairwise_lsd, within_subjects_anova
from ..vehicle import DT
from .schemas import (
    CmdMessage,
    ConfigMessage,
    Diag,
    EndMessage,
    FrameMessage,
    HealthResponse,
    ModeMessage,
    ModesResponse,
    PairResult,
    PresetInfo,
    RunRequest,
    RunResponse,
    StatsRequest,
    StatsResponse,
)

DEFAULT_SEND_EVERY = 5  # ticks between frame messages (10 Hz at DT=0.02)


class LiveSession:
    """One WebSocket-driven session and its attachment state."""

    def __init__(self, config: SessionConfig, send_every: int = DEFAULT_SEND_EVERY, duration: float | None = None):
        self.session = Session(config)
        self.send_every = send_every
        self.duration = duration
        self.attached = False
        self.frames_sent = 0


def create_app(default_config: SessionConfig | None = None, static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="spir-teleop", version=__version__)
    app.state.default_config = default_config or SessionConfig()
    app.state.sessions: dict[str, LiveSession] = {}

    @app.get("/healthz", response_model=HealthResponse)
    def healthz() -> HealthResponse:
        return HealthResponse(version=__version__)

    @app.get("/api/modes", response_model=ModesResponse)
    def modes() -> ModesResponse:
        return ModesResponse()

    @app.get("/api/presets", response_model=list[PresetInfo])
    def presets() -> list[PresetInfo]:
        return [PresetInfo(**vars(p)) for p in PRESETS.values()]

    @app.get("/api/config")
    def config() -> dict:
        return app.state.default_config.to_dict()

    @app.post("/api/runs", response_model=RunResponse)
    def runs(req: RunRequest) -> RunResponse:
        if req.duration is None and req.laps is None:
            raise HTTPException(status_code=422, detail="need duration or laps")
        cfg = replace(
            app.state.default_config,
            mode=req.mode,
            preset=req.preset,
            seed=req.seed,
            render_every=req.render_every,
            target_speed=req.target_speed,
        )
        record = run_headless(cfg, duration=req.duration, laps=req.laps)
        log = record.run_log()
        session = Session(cfg)  # for the course reference only
        if len(log):
            avg = average_speed(log) if len(log) > 1 else 0.0
            err_sum, err_mean = position_error(log, session.course)
        else:
            avg = err_sum = err_mean = 0.0
        switches = max((r.get("switch_count") or 0) for r in record.diag_rows) if record.diag_rows else 0
        return RunResponse(
            mode=req.mode,
            samples=len(record.runlog_rows),
            sim_duration=len(record.runlog_rows) * DT,
            average_speed=avg,
            position_error_sum=err_sum,
            position_error_mean=err_mean,
            laps=sum(1 for _, kind, _ in record.events if kind == "lap"),
            switches=switches,
            events=[f"{t:.2f}:{kind}:{detail}" for t, kind, detail in record.events],
        )

    @app.post("/api/stats", response_model=StatsResponse)
    def stats(req: StatsRequest) -> StatsResponse:
        try:
            matrix = TrialMatrix(req.measurements)
            result = within_subjects_anova(matrix)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        labels = req.labels or [f"system{i}" for i in range(matrix.n_systems)]
        if len(labels) != matrix.n_systems:
            raise HTTPException(status_code=422, detail="labels length mismatch")
        thr = lsd_threshold(result.ms_sxa, matrix.n_subjects, result.df_sxa, req.alpha)
        pairs = [
            PairResult(a=labels[c.i], b=labels[c.j], difference=c.difference, threshold=c.threshold, significant=c.significant)
            for c in pairwise_lsd(matrix, req.alpha)
        ]
        return StatsResponse(
            ss_a=result.ss_a,
            ss_sub=result.ss_sub,
            ss_sxa=result.ss_sxa,
            ss_total=result.ss_total,
            df_a=result.df_a,
            df_sub=result.df_sub,
            df_sxa=result.df_sxa,
            ms_a=result.ms_a,
            ms_sxa=result.ms_sxa,
            f=result.f,
            lsd_threshold=thr,
            pairs=pairs,
            table_text=anova_table_text(result, "ANOVA"),
        )

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket) -> None:
        await ws.accept()
        name = ws.query_params.get("session", "default")
        live = app.state.sessions.get(name)
        if live is not None and live.attached:
            await ws.close(code=4409, reason="session already attached")
            return
        if live is None:
            live = LiveSession(app.state.default_config)
            app.state.sessions[name] = live
        live.attached = True
        try:
            await _drive_session(ws, live, app)
        except WebSocketDisconnect:
            pass
        finally:
            live.attached = False
            # Connection gone: hold the vehicle until the console returns.
            live.session.submit_command(0.0, 0.0)

    async def _drive_session(ws: WebSocket, live: LiveSession, app: FastAPI) -> None:
        session = live.session
        config_echo = ConfigMessage(
            mode=session.mode,
            preset=session.preset.name,
            seed=session.seed,
            send_every=live.send_every,
            realtime=session.config.realtime,
            duration=live.duration,
            image_interval=session.preset.image_interval,
            max_steering=session.params.max_steering,
        )
        await ws.send_json(config_echo.model_dump())

        recv_task = asyncio.create_task(ws.receive_json())
        wall_start = time.monotonic() - session.tick_index * DT
        try:
            while True:
                if live.duration is not None and session.sim_time >= live.duration - 1e-9:
                    await ws.send_json(EndMessage(t=session.sim_time, frames_sent=live.frames_sent).model_dump())
                    break

                while recv_task.done():
                    message = recv_task.result()
                    _handle_client_message(app, live, message)
                    session = live.session
                    recv_task = asyncio.create_task(ws.receive_json())

                if session.config.realtime:
                    target = wall_start + (session.tick_index + 1) * DT
                    delay = target - time.monotonic()
                    if delay > 0:
                        await asyncio.sleep(delay)
                else:
                    await asyncio.sleep(0)  # let the receiver task run

                session.tick()

                if session.tick_index % live.send_every == 0 and session.display_frame is not None:
                    diag = session.display_diag or {}
                    msg = FrameMessage(
                        t=session.sim_time,
                        png_or_ppm_b64=base64.b64encode(write_ppm(session.display_frame)).decode(),
                        mode=session.mode,
                        diag=Diag(
                            record_id=diag.get("record_id"),
                            d=diag.get("d"),
                            theta=diag.get("theta"),
                            sub_fraction=diag.get("sub_fraction"),
                            switch_count=diag.get("switch_count"),
                            delayed_t=diag.get("delayed_t"),
                        ),
                    )
                    await ws.send_json(msg.model_dump())
                    live.frames_sent += 1
        finally:
            recv_task.cancel()

    def _handle_client_message(app: FastAPI, live: LiveSession, message: dict) -> None:
        kind = message.get("type")
        if kind == "cmd":
            cmd = CmdMessage(**message)
            live.session.submit_command(cmd.throttle, cmd.steering)
        elif kind == "mode":
            live.session.set_mode(ModeMessage(**message).value)
        elif kind == "config":
            cfg_msg = ConfigMessage(**message)
            if cfg_msg.send_every is not None:
                live.send_every = cfg_msg.send_every
            if cfg_msg.duration is not None:
                live.duration = cfg_msg.duration
            if live.session.tick_index == 0 and (cfg_msg.mode or cfg_msg.preset or cfg_msg.seed is not None or cfg_msg.realtime is not None):
                base = live.session.config
                new_cfg = replace(
                    base,
                    mode=cfg_msg.mode or base.mode,
                    preset=cfg_msg.preset or base.preset,
                    seed=base.seed if cfg_msg.seed is None else cfg_msg.seed,
                    realtime=base.realtime if cfg_msg.realtime is None else cfg_msg.realtime,
                )
                live.session = Session(new_cfg)
            elif cfg_msg.mode:
                live.session.set_mode(cfg_msg.mode)

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="console")

    return app
