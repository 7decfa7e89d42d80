"""Command line entry point: ``advsim <subcommand>``.

Exit codes: 0 success, 2 configuration or usage error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import yaml

from . import __version__
from . import pipeline as P
from .config import ConfigError, load_scenario, parse_weather_block, validate
from .defense import DefenseError
from .patcher import PatchError
from .scene import SceneError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

log = logging.getLogger("advsim")


def _param(text: str):
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    return key, yaml.safe_load(value)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="advsim", description="Deterministic synthetic scene simulator.")
    ap.add_argument("--version", action="version", version=f"advsim {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="render a scenario into a run directory")
    g.add_argument("--config", required=True)
    g.add_argument("--seed", type=int)
    g.add_argument("--max_frames", "--max-frames", dest="max_frames", type=int)
    g.add_argument("--out", help=f"run directory (default: ${P.OUTPUT_ROOT_ENV}/<output_dir> or <output_dir>)")
    g.add_argument("--weather", help="YAML file whose weather block replaces the scenario's")
    g.add_argument("--workers", type=int, default=1)
    g.add_argument("--overwrite", action="store_true")

    a = sub.add_parser("annotate", help="export kwcoco and/or MOTS annotations of a run")
    a.add_argument("run")
    a.add_argument("--format", choices=P.ANNOTATION_FORMATS + ("all",), default="all")
    a.add_argument("--min-pixels", type=int, default=10)

    p = sub.add_parser("patch", help="insert a patch image into a run or scenario")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--run", help="base run directory")
    src.add_argument("--config", help="scenario config (a base run is generated when needed)")
    p.add_argument("--method", choices=P.PATCH_METHODS, required=True)
    p.add_argument("--patch", required=True, help="patch PNG or directory of frame_%%06d.png")
    p.add_argument("--placeholder", help="placeholder instance id or name (default: first)")
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--overwrite", action="store_true")

    e = sub.add_parser("eval", help="run a defense experiment over one or more runs")
    e.add_argument("runs", nargs="+")
    e.add_argument("--experiment", choices=P.EXPERIMENTS, required=True)
    e.add_argument("--param", type=_param, action="append", default=[], metavar="KEY=VALUE")
    e.add_argument("--out", help="write the JSON report here instead of stdout")

    v = sub.add_parser("validate-config", help="parse and check a scenario without rendering")
    v.add_argument("--config", required=True)
    return ap


def _cmd_generate(args) -> int:
    weather = None
    if args.weather:
        weather = parse_weather_block(Path(args.weather).read_text(encoding="utf-8"))
    m = P.generate(args.config, args.out, seed=args.seed, max_frames=args.max_frames, weather=weather,
                   workers=args.workers, overwrite=args.overwrite)
    print(f"{m.path}: {m.frame_count} frames x {len(m.sensors)} sensors, {len(m.files)} files")
    return EXIT_OK


def _cmd_annotate(args) -> int:
    formats = P.ANNOTATION_FORMATS if args.format == "all" else (args.format,)
    for path in P.annotate(args.run, formats, min_pixels=args.min_pixels):
        print(path)
    return EXIT_OK


def _cmd_patch(args) -> int:
    m = P.patch(args.run or args.config, args.method, args.patch, args.out, placeholder=args.placeholder,
                workers=args.workers, overwrite=args.overwrite)
    print(f"{m.path}: {args.method} patch, {len(m.files)} files")
    return EXIT_OK


def _cmd_eval(args) -> int:
    report = P.evaluate(args.runs, args.experiment, dict(args.param))
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_validate(args) -> int:
    config = load_scenario(args.config)
    for w in config.warnings:
        print(f"warning: {w}")
    diags = validate(config)
    for d in diags:
        print(f"error: {d}")
    if diags:
        return EXIT_CONFIG
    print(f"ok: {len(config.actors)} actors, {len(config.sensors)} sensors, {config.sim.max_frames} frames")
    return EXIT_OK


COMMANDS = {
    "generate": _cmd_generate,
    "annotate": _cmd_annotate,
    "patch": _cmd_patch,
    "eval": _cmd_eval,
    "validate-config": _cmd_validate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, SceneError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG if args.command == "validate-config" else EXIT_RUNTIME
    except (P.RunError, PatchError, DefenseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
