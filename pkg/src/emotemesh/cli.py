"""Command line entry point.

Subcommands cover the whole pipeline: validate a rig against its mesh,
inspect or audit expression tables, render a script to frames, bake morph
targets, score rating studies, and run the live service. A bundled sample
face (pass "sample" wherever a rig or mesh path is expected, or just omit
the flag) plus the built-in table make every subcommand usable with no
assets on disk.

Exit codes: 0 success, 1 the input was understood but invalid, 2 usage or
I/O trouble.
"""

from __future__ import annotations

import argparse
import asyncio
import math
import os
import sys
from pathlib import Path

from .animator import (
    IdleConfig,
    bake_morph_targets,
    export_obj_sequence,
    frames_to_csv,
    frames_to_jsonl,
    morphs_to_json,
    sample_timeline,
)
from .engine import AffectEvent, EventScript, load_script, scaled_script
from .errors import EmoteMeshError
from .metrics import analyze, load_ratings, report
from .rig import Mesh, Rig, load_mesh, load_rig, validate_rig_against_mesh
from .sampleface import sample_face, sample_rig
from .service import ServiceConfig, serve
from .table import (
    ExpressionTable,
    builtin_table,
    load_table,
    magnitude_audit,
    symmetry_audit,
    table_to_json,
)

TABLE_ENV = "EMOTEMESH_TABLE"
SAMPLE = "sample"


class UsageError(Exception):
    pass


# -- asset loading ----------------------------------------------------------


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _load_table_arg(path: "str | None") -> ExpressionTable:
    if path is None:
        path = os.environ.get(TABLE_ENV)
    if path is None:
        return builtin_table()
    return load_table(_read(path))


def _load_mesh_arg(path: str) -> Mesh:
    if path == SAMPLE:
        return sample_face()
    return load_mesh(_read(path))


def _load_rig_arg(rig_path: str, mesh_path: "str | None") -> tuple[Rig, Mesh]:
    """Resolve a rig plus the mesh it binds. "sample" yields the bundled
    face; a real rig path needs a mesh path alongside."""
    if rig_path == SAMPLE:
        mesh = sample_face() if mesh_path in (None, SAMPLE) else load_mesh(_read(mesh_path))
        return sample_rig(mesh if mesh_path not in (None, SAMPLE) else None), mesh
    rig = load_rig(_read(rig_path))
    if mesh_path is None:
        raise UsageError("--mesh is required when --rig is a file path")
    return rig, _load_mesh_arg(mesh_path)


def _demo_script() -> EventScript:
    return EventScript(
        events=(
            AffectEvent(t=0.0, label="joy", intensity=0.3),
            AffectEvent(t=0.8, label="surprise", intensity=0.6),
        ),
        fps=30.0,
        duration_s=2.0,
    )


def _write_output(text: str, out: "str | None"):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


# -- subcommands --------------------------------------------------------------


def cmd_validate(args) -> int:
    rig, mesh = _load_rig_arg(args.rig, args.mesh)
    problems = validate_rig_against_mesh(rig, mesh)
    if problems:
        for line in problems:
            print(line, file=sys.stderr)
        return 1
    touched = set()
    for anchor in rig.anchors.values():
        touched.update(anchor.weights)
    print(f"OK: {len(rig.anchors)} anchors, {len(touched)} weighted vertices")
    return 0


def cmd_table(args) -> int:
    table = _load_table_arg(args.table)
    if args.action == "dump":
        sys.stdout.write(table_to_json(table))
        return 0
    findings = symmetry_audit(table)
    warnings = magnitude_audit(table)
    for finding in findings:
        print(f"asymmetry: {finding}")
    for warning in warnings:
        print(f"warning: {warning}")
    print(f"audit: {len(findings)} asymmetry finding(s), {len(warnings)} magnitude warning(s)")
    return 0


def cmd_animate(args) -> int:
    if args.script is None:
        script = _demo_script()
    else:
        script = load_script(_read(args.script))
    if args.fps is not None:
        if not 0 < args.fps <= 240:
            raise UsageError("--fps must be in (0, 240]")
        script = EventScript(script.events, script.mode, args.fps, script.duration_s, script.tau_s)
    if args.tau is not None:
        tau = math.inf if args.tau in ("inf", "none") else float(args.tau)
        script = EventScript(script.events, script.mode, script.fps, script.duration_s, tau)
    if args.intensity_mult != 1.0:
        script = scaled_script(script, args.intensity_mult)

    table = _load_table_arg(args.table)
    idle = IdleConfig(enabled=True, seed=args.seed) if args.seed is not None else None
    frames = sample_timeline(script, table, idle)

    if args.format == "obj":
        if args.rig is None:
            raise UsageError("--format obj needs --rig (and --mesh for a rig file)")
        if args.out is None:
            raise UsageError("--format obj needs --out DIRECTORY")
        rig, mesh = _load_rig_arg(args.rig, args.mesh)
        paths = export_obj_sequence(frames, mesh, rig, args.out)
        print(f"wrote {len(paths)} OBJ frames to {args.out}")
        return 0
    text = frames_to_jsonl(frames) if args.format == "jsonl" else frames_to_csv(frames)
    _write_output(text, args.out)
    return 0


def cmd_bake(args) -> int:
    rig, mesh = _load_rig_arg(args.rig, args.mesh)
    table = _load_table_arg(args.table)
    morphs = bake_morph_targets(mesh, rig, table)
    _write_output(morphs_to_json(morphs), args.out)
    return 0


def cmd_quality(args) -> int:
    matrix = load_ratings(_read(args.ratings), likert=args.likert)
    sys.stdout.write(report(analyze(matrix)))
    return 0


def cmd_serve(args) -> int:
    rig, mesh = _load_rig_arg(args.rig, args.mesh)
    config = ServiceConfig(
        table=_load_table_arg(args.table),
        rig=rig,
        mesh=mesh,
        fps=args.fps,
        tau_s=math.inf if args.tau in ("inf", "none") else float(args.tau),
        log_path=Path(args.log) if args.log else None,
    )
    print(f"serving on ws://{args.host}:{args.port}/ws", flush=True)
    if args.tcp_port is not None:
        print(f"tcp fallback on {args.host}:{args.tcp_port}", flush=True)
    try:
        asyncio.run(serve(config, host=args.host, port=args.port, tcp_port=args.tcp_port))
    except KeyboardInterrupt:
        pass
    return 0


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="emotemesh",
        description="Affective facial animation: expression tables, envelopes, mood, morphs, streaming.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a rig document against its mesh")
    p.add_argument("rig", nargs="?", default=SAMPLE, help="rig JSON path, or 'sample' (default)")
    p.add_argument("mesh", nargs="?", default=None, help="mesh OBJ path, or 'sample'")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("table", help="dump or audit an expression table")
    p.add_argument("action", choices=("dump", "audit"))
    p.add_argument("--table", default=None, help=f"table JSON path (default: ${TABLE_ENV} or builtin)")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("animate", help="sample a script into frames")
    p.add_argument("script", nargs="?", default=None, help="script JSON path, '-' for stdin, or omit for a demo")
    p.add_argument("--table", default=None)
    p.add_argument("--rig", default=None, help="rig JSON path or 'sample' (required for --format obj)")
    p.add_argument("--mesh", default=None, help="mesh OBJ path (required with a rig file path)")
    p.add_argument("--fps", type=float, default=None, help="override the script frame rate")
    p.add_argument("--tau", default=None, help="override mood time constant in seconds ('inf' disables mood)")
    p.add_argument("--format", choices=("jsonl", "csv", "obj"), default="jsonl")
    p.add_argument("--seed", type=int, default=None, help="enable the blink layer with this seed")
    p.add_argument("--intensity-mult", type=float, default=1.0, help="multiply every trigger intensity")
    p.add_argument("--out", default=None, help="output file (jsonl/csv, default stdout) or directory (obj)")
    p.set_defaults(func=cmd_animate)

    p = sub.add_parser("bake", help="bake per-label morph targets for a rig")
    p.add_argument("--rig", default=SAMPLE)
    p.add_argument("--mesh", default=None)
    p.add_argument("--table", default=None)
    p.add_argument("--out", default=None, help="morph JSON output (default stdout)")
    p.set_defaults(func=cmd_bake)

    p = sub.add_parser("quality", help="recognition-quality report from a rating CSV")
    p.add_argument("ratings", help="CSV with header subject,shown,rated,rating ('-' for stdin)")
    p.add_argument("--likert", action="store_true", help="ratings are raw 0..4 Likert scores")
    p.set_defaults(func=cmd_quality)

    p = sub.add_parser("serve", help="run the live streaming service")
    p.add_argument("--rig", default=SAMPLE)
    p.add_argument("--mesh", default=None)
    p.add_argument("--table", default=None)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--tcp-port", type=int, default=None, help="also speak newline-delimited JSON over TCP")
    p.add_argument("--fps", type=float, default=30.0)
    p.add_argument("--tau", default="60", help="mood time constant in seconds ('inf' disables mood)")
    p.add_argument("--log", default=None, help="append applied commands to this JSONL file")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: "list[str] | None" = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (EmoteMeshError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
