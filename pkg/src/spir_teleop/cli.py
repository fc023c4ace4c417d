"""Command line interface.

Subcommands:
  run     headless scripted run, writes a record directory
  serve   start the FastAPI service (WebSocket console + REST)
  replay  re-run a recorded session and verify it reproduces byte-identically
  stats   per-run metrics plus ANOVA/LSD report over a directory of records
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import MODES, __version__
from .channel import PRESETS
from .course import default_course, load_course
from .metrics import average_speed, position_error
from .session import SessionConfig, SessionRecord, replay, run_headless
from .stats import TrialMatrix, anova_table_text, lsd_report_text, within_subjects_anova
from .vehicle import NoiseConfig


def _add_session_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=MODES, default="spir2")
    p.add_argument("--preset", choices=sorted(PRESETS), default="spir")
    p.add_argument("--course", default=None, help="course file (default: built-in loop)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--target-speed", type=float, default=0.9)
    p.add_argument("--render-every", type=int, default=1, help="ticks between composited frames")
    p.add_argument("--noise-xy", type=float, default=0.0, help="localization noise sigma in meters (seeded)")


def _config_from_args(args: argparse.Namespace) -> SessionConfig:
    sigma = getattr(args, "noise_xy", 0.0)
    noise = NoiseConfig(enabled=sigma > 0.0, sigma_xy=sigma, seed=args.seed)
    return SessionConfig(
        mode=args.mode,
        preset=args.preset,
        course_path=args.course,
        seed=args.seed,
        target_speed=getattr(args, "target_speed", 0.9),
        render_every=getattr(args, "render_every", 1),
        realtime=getattr(args, "realtime", False),
        noise=noise,
    )


def cmd_run(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    record = run_headless(config, duration=args.duration, laps=args.laps)
    course = load_course(args.course) if args.course else default_course()
    log = record.run_log()
    out = {
        "mode": config.mode,
        "samples": len(record.runlog_rows),
        "laps": sum(1 for _, kind, _ in record.events if kind == "lap"),
    }
    if len(log) > 1:
        out["average_speed"] = average_speed(log)
        err_sum, err_mean = position_error(log, course)
        out["position_error_sum"] = err_sum
        out["position_error_mean"] = err_mean
    if args.out:
        record.save(args.out)
        out["record"] = str(args.out)
    print(json.dumps(out, indent=2))
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .server import create_app

    config = _config_from_args(args)
    static = args.static_dir
    if static is None:
        bundled = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        static = str(bundled) if bundled.is_dir() else None
    app = create_app(config, static_dir=static)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    record = SessionRecord.load(args.record)
    again = replay(record)
    identical = again.to_bytes() == record.to_bytes()
    print(json.dumps({"record": str(args.record), "samples": len(again.runlog_rows), "identical": identical}))
    if args.out:
        again.save(args.out)
    return 0 if identical else 1


def cmd_stats(args: argparse.Namespace) -> int:
    runs_dir = Path(args.runs)
    records = sorted(p for p in runs_dir.iterdir() if (p / "runlog.csv").is_file())
    if not records:
        print(f"no run records under {runs_dir}", file=sys.stderr)
        return 1
    rows = []
    for rec_dir in records:
        record = SessionRecord.load(rec_dir)
        course = load_course(record.config["course_path"]) if record.config.get("course_path") else default_course()
        log = record.run_log()
        if len(log) < 2:
            continue
        err_sum, err_mean = position_error(log, course)
        rows.append(
            {
                "run": rec_dir.name,
                "mode": log.mode,
                "seed": record.config.get("seed", 0),
                "average_speed": average_speed(log),
                "position_error_sum": err_sum,
                "position_error_mean": err_mean,
            }
        )
    csv_lines = ["run,mode,seed,average_speed,position_error_sum,position_error_mean"]
    for r in rows:
        csv_lines.append(
            f"{r['run']},{r['mode']},{r['seed']},{r['average_speed']!r},{r['position_error_sum']!r},{r['position_error_mean']!r}"
        )
    csv_text = "\n".join(csv_lines) + "\n"
    if args.out:
        Path(args.out).write_text(csv_text)
    print(csv_text)

    # Subjects = seeds, systems = modes; ANOVA needs a complete grid.
    seeds = sorted({r["seed"] for r in rows})
    modes = [m for m in MODES if any(r["mode"] == m for r in rows)]
    grid: dict[tuple[int, str], dict] = {(r["seed"], r["mode"]): r for r in rows}
    complete = len(seeds) >= 2 and len(modes) >= 2 and all((s, m) in grid for s in seeds for m in modes)
    if not complete:
        print("(need >= 2 seeds x >= 2 modes with complete coverage for the ANOVA/LSD report)")
        return 0
    for metric, title in (("average_speed", "ANOVA (average speeds)"), ("position_error_mean", "ANOVA (position errors)")):
        matrix = TrialMatrix([[grid[(s, m)][metric] for m in modes] for s in seeds])
        try:
            result = within_subjects_anova(matrix)
        except ValueError as exc:
            print(f"{title}: {exc}")
            continue
        print(anova_table_text(result, title))
        print(lsd_report_text(matrix, modes))
        print()
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="spir-teleop", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="headless scripted run")
    _add_session_args(p_run)
    group = p_run.add_mutually_exclusive_group(required=True)
    group.add_argument("--laps", type=int)
    group.add_argument("--duration", type=float)
    p_run.add_argument("--out", default=None, help="record output directory")
    p_run.set_defaults(func=cmd_run)

    p_serve = sub.add_parser("serve", help="start the console service")
    _add_session_args(p_serve)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--realtime", action=argparse.BooleanOptionalAction, default=True)
    p_serve.add_argument("--static-dir", default=None, help="console bundle directory")
    p_serve.set_defaults(func=cmd_serve)

    p_replay = sub.add_parser("replay", help="re-run a recorded session")
    p_replay.add_argument("--record", required=True)
    p_replay.add_argument("--out", default=None)
    p_replay.set_defaults(func=cmd_replay)

    p_stats = sub.add_parser("stats", help="metrics + ANOVA/LSD over run records")
    p_stats.add_argument("--runs", required=True)
    p_stats.add_argument("--out", default=None, help="metrics CSV output path")
    p_stats.add_argument("--alpha", type=float, default=0.05)
    p_stats.set_defaults(func=cmd_stats)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
