"""
Command-line entry point.

    monolab run SCENE [--out report.json] [--plot DIR] [--seed N] [--tol X] [--timing]
    monolab catalog list
    monolab catalog show NAME

Exit codes: 0 ran, 1 scene could not be read or parsed, 2 some request was
inconclusive, 3 internal error.
"""

import argparse
import json
import logging
import os
import sys
from typing import Dict, List, Optional

import config
from catalog.builtins import default_catalog, expected, list_names
from core.errors import MonolabError, SceneError
from core.normgeom import GraphPoint
from core.report import Report, emit_report, run_analyses
from core.scene import Scene, parse_scene
from utils.svg_plot import render_plot

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_INTERNAL = 3


def _configure_logging(verbose: bool):
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format='%(asctime)s - %(levelname)s - [%(filename)s:%(lineno)d] - %(message)s',
        stream=sys.stderr,
        force=True,
    )


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--verbose", action="store_true", help="Log sampling internals (DEBUG level).")

    parser = argparse.ArgumentParser(prog=config.TOOL_NAME, description="Local monotonicity analyses of set-valued operators.")
    parser.add_argument("--version", action="version", version=f"{config.TOOL_NAME} {config.TOOL_VERSION}")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", parents=[common], help="Run the analyses of a scene file.")
    run.add_argument("scene", help="Path to the scene file.")
    run.add_argument("--out", help="Write the JSON report here instead of stdout.")
    run.add_argument("--plot", metavar="DIR", help="Write one SVG per one-dimensional operator into DIR.")
    run.add_argument("--seed", type=int, default=0, help="Seed for randomized searches (default 0).")
    run.add_argument("--tol", type=float, default=None, help="Override the inner-product tolerance.")
    run.add_argument("--timing", action="store_true", help="Record wall-clock time in the report.")

    catalog = commands.add_parser("catalog", parents=[common], help="Inspect the built-in operator catalog.")
    catalog_commands = catalog.add_subparsers(dest="catalog_command", required=True)
    catalog_commands.add_parser("list", help="List catalog operators.")
    show = catalog_commands.add_parser("show", help="Show one catalog entry.")
    show.add_argument("name")
    return parser


# --- Plots ---


def _witness_points(record: dict) -> List[GraphPoint]:
    witness = record.get("verdict", {}).get("witness")
    if record.get("status") != "FAIL" or not witness:
        return []
    return [GraphPoint(p["x"], p["v"]) for p in witness.get("points", [])]


def write_plots(scene: Scene, report: Report, directory: str) -> List[str]:
    """One SVG per one-dimensional operator that has requests; the first request fixes the box."""
    os.makedirs(directory, exist_ok=True)
    written = []
    by_operator: Dict[str, List[int]] = {}
    for i, req in enumerate(scene.requests):
        by_operator.setdefault(req.op, []).append(i)
    for name in sorted(by_operator):
        op = scene.operator(name)
        if op.dim != 1:
            logging.info("Skipping plot of %s: dimension %d.", name, op.dim)
            continue
        indices = by_operator[name]
        box = scene.requests[indices[0]].box(scene.norm)
        probes = [scene.requests[i].point for i in indices]
        witnesses = [p for i in indices for p in _witness_points(report.records[i])]
        try:
            text = render_plot(op, box, probes, witnesses)
        except MonolabError as e:
            logging.error("Cannot plot %s: %s", name, e)
            continue
        path = os.path.join(directory, f"{name}.svg")
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
        written.append(path)
    logging.info("Wrote %d plots to %s.", len(written), directory)
    return written


# --- Commands ---


def _run(args) -> int:
    try:
        with open(args.scene, "r", encoding="utf-8") as f:
            text = f.read()
    except (OSError, UnicodeDecodeError) as e:
        print(f"{args.scene}: cannot read scene: {e}", file=sys.stderr)
        return EXIT_PARSE
    try:
        scene = parse_scene(text)
    except SceneError as e:
        print(f"{args.scene}: {e.code}: {e}", file=sys.stderr)
        return EXIT_PARSE

    report = run_analyses(scene, seed=args.seed, tol=args.tol, timing=args.timing)
    output = emit_report(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(output)
        logging.info("Report written to %s.", args.out)
    else:
        sys.stdout.write(output)
    if args.plot:
        write_plots(scene, report, args.plot)
    return report.exit_code()


def _catalog(args) -> int:
    catalog = default_catalog()
    if args.catalog_command == "list":
        for name in list_names(catalog):
            entry = catalog.get_entry(name)
            print(f"{name:<28} {entry.kind:<22} {entry.description}")
        return EXIT_OK
    try:
        entry = expected(args.name, catalog)
    except MonolabError as e:
        print(f"{e.code}: {e}", file=sys.stderr)
        return EXIT_PARSE
    print(json.dumps(entry.to_dict(), indent=2, sort_keys=True))
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    try:
        if args.command == "run":
            return _run(args)
        return _catalog(args)
    except Exception as e:
        logging.exception("Internal error: %s", e)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
