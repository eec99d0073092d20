"""Command line entry points: ingest, validate, serve, simulate."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .catalog import load_catalog
from .config import EngineConfig, load_config
from .errors import CatalogValidationError, EngineError
from .orchestrator import Orchestrator
from .simulator import load_scenario, run_scenario


def _load_config_arg(path: str | None) -> EngineConfig:
    return load_config(path) if path else EngineConfig()


def cmd_ingest(args: argparse.Namespace) -> int:
    config = _load_config_arg(args.config)
    try:
        catalog = load_catalog(
            args.manifest,
            locales=config.locales,
            loop_threshold=config.loop_threshold_bits,
            check_assets=args.check_assets,
        )
    except CatalogValidationError as exc:
        print(f"INVALID: {len(exc.issues)} problem(s) in {args.manifest}")
        for issue in exc.issues:
            print(f"  {issue}")
        return 1
    except EngineError as exc:
        print(f"INVALID: {exc}")
        return 1
    print(f"OK: {len(catalog)} pages, manifest version {catalog.version}")
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    # Same gate as ingest, phrased as a per-asset loop report.
    config = _load_config_arg(args.config)
    try:
        catalog = load_catalog(
            args.catalog,
            locales=config.locales,
            loop_threshold=config.loop_threshold_bits,
        )
    except CatalogValidationError as exc:
        print(f"INVALID: {len(exc.issues)} problem(s)")
        for issue in exc.issues:
            print(f"  {issue}")
        return 1
    except EngineError as exc:
        print(f"INVALID: {exc}")
        return 1
    for page in catalog.pages:
        asset = page.video
        print(
            f"ok {asset.asset_id}: {asset.duration_s:g} s @ {asset.fps} fps, "
            f"{asset.frame_count} frames, seam {asset.seam_distance()} bits"
        )
    print(f"OK: all {len(catalog)} loop assets valid")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .server import build_app, now_ms

    config = _load_config_arg(args.config)
    catalog = load_catalog(
        args.catalog, locales=config.locales, loop_threshold=config.loop_threshold_bits
    )
    engine = Orchestrator(
        config, catalog, seed=args.seed, journal_path=args.journal, now=now_ms()
    )
    pages_dir = Path(args.catalog).parent
    static = args.static if args.static and Path(args.static).is_dir() else None
    app = build_app(engine, pages_dir=pages_dir, static_dir=static)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    config = _load_config_arg(args.config)
    catalog = load_catalog(
        args.catalog, locales=config.locales, loop_threshold=config.loop_threshold_bits
    )
    script = load_scenario(args.scenario)
    report = run_scenario(script, config, catalog, seed=args.seed, journal_path=args.journal)
    text = report.to_json()
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
    else:
        print(text, end="")
    if not report.ok:
        print(f"{len(report.violations)} violation(s)", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="towerloop",
        description="Reading-kiosk and video-tower orchestration engine",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a page manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--check-assets", action="store_true",
                   help="also require referenced image/video files to exist")
    p.add_argument("--config")
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("validate", help="run loop validation over all catalog assets")
    p.add_argument("--catalog", required=True)
    p.add_argument("--config")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("serve", help="run the control server")
    p.add_argument("--config")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--catalog", required=True)
    p.add_argument("--journal")
    p.add_argument("--static", help="directory with the built kiosk bundle")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("simulate", help="run a scenario against a simulated display")
    p.add_argument("--scenario", required=True)
    p.add_argument("--config")
    p.add_argument("--catalog", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--journal")
    p.add_argument("--report", help="write the report JSON here instead of stdout")
    p.set_defaults(fn=cmd_simulate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO)
    try:
        return args.fn(args)
    except EngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
