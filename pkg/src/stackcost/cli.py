"""Command-line interface.

Subcommands: project (one technology, one design size), compare (matrix
across technologies and sizes), export-distribution (plot-ready curve
samples), calibrate (knob search against the reproduction targets).

Exit codes: 0 success, 2 usage, 3 configuration/validation, 4 model error.
Failures print a single machine-parsable JSON record to stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from typing import Any

import yaml

from . import __version__
from .calibrate import CalibrationTargets, calibrate
from .cost import MODE_EQ13, MODE_PAPER
from .errors import ConfigError, StackcostError, UsageError
from .pipeline import compare, export_distribution, project, render_compare, render_project
from .techlib import (
    BUILTIN_CALIBRATED,
    BUILTIN_UNCALIBRATED,
    LIBRARY_ENV_VAR,
    library_to_dict,
    load_library,
)

_MODE_FLAGS = {"paper-constants": MODE_PAPER, "eq13": MODE_EQ13}

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_MODEL = 4


def _parse_gates(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise UsageError(f"gate count {text!r} is not a number") from None
    if not value >= 1:
        raise UsageError(f"gate count must be >= 1, got {text}")
    return value


def _parse_gates_list(values: list[str]) -> list[float]:
    out: list[float] = []
    for chunk in values:
        for piece in chunk.split(","):
            piece = piece.strip()
            if piece:
                out.append(_parse_gates(piece))
    if not out:
        raise UsageError("no gate counts given")
    return out


def _parse_tech_list(values: list[str]) -> list[str]:
    out: list[str] = []
    for chunk in values:
        for piece in chunk.split(","):
            piece = piece.strip()
            if piece:
                out.append(piece)
    return out


def _library_source(arg: str | None) -> str:
    return arg or os.environ.get(LIBRARY_ENV_VAR) or BUILTIN_CALIBRATED


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _emit_document(doc: dict[str, Any], fmt: str, out_path: str | None, renderer) -> None:
    if fmt == "machine":
        _emit(json.dumps(doc, indent=2) + "\n", out_path)
    else:
        _emit(renderer(doc), out_path)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stackcost",
        description="Interconnect, die-area, metal-layer and relative-cost projection "
        "for 2-D CMOS, TSV 3-D, monolithic 3-D and stacked-nanowire 3-D integration.",
    )
    parser.add_argument("--version", action="version", version=f"stackcost {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--library", help=f"library file or builtin marker (default: "
                       f"${LIBRARY_ENV_VAR} or {BUILTIN_CALIBRATED})")
        p.add_argument("--mode", choices=sorted(_MODE_FLAGS), default="paper-constants",
                       help="die-cost parameter mode (default: paper-constants)")
        p.add_argument("--format", choices=("table", "machine"), default="table",
                       help="human table or machine-readable JSON (default: table)")
        p.add_argument("--out", help="write output to this path instead of stdout")

    p_project = sub.add_parser("project", help="full pipeline for one technology and size")
    p_project.add_argument("--tech", required=True, help="technology profile name")
    p_project.add_argument("--gates", required=True, help="gate count (scientific notation ok)")
    common(p_project)

    p_compare = sub.add_parser("compare", help="matrix comparison across technologies")
    p_compare.add_argument("--tech", action="append", default=None,
                           help="technology (repeat or comma-separate; default all four)")
    p_compare.add_argument("--gates", action="append", default=None,
                           help="gate counts (repeat or comma-separate; default 5e6,1e7,2e7)")
    common(p_compare)

    p_export = sub.add_parser("export-distribution",
                              help="CSV samples of (l, i(l), I(l), L(l))")
    p_export.add_argument("--tech", required=True)
    p_export.add_argument("--gates", required=True)
    p_export.add_argument("--samples", type=int, default=200,
                          help="number of log-uniform samples (default 200)")
    common(p_export)

    p_cal = sub.add_parser("calibrate", help="search knobs against the reproduction targets")
    p_cal.add_argument("--library", help=f"input library (default {BUILTIN_UNCALIBRATED})")
    p_cal.add_argument("--out", help="write the adjusted library YAML here")
    p_cal.add_argument("--report", help="write the calibration report YAML here")
    p_cal.add_argument("--format", choices=("table", "machine"), default="table")
    p_cal.add_argument("--seed", type=int, default=0, help="recorded in the report")
    return parser


def _run_project(args: argparse.Namespace) -> int:
    source = _library_source(args.library)
    library = load_library(source)
    gates = _parse_gates(args.gates)
    report = project(library, args.tech, gates, _MODE_FLAGS[args.mode], source)
    _emit_document(report.to_dict(), args.format, args.out,
                   lambda _doc: render_project(report))
    return EXIT_OK


def _run_compare(args: argparse.Namespace) -> int:
    source = _library_source(args.library)
    library = load_library(source)
    techs = _parse_tech_list(args.tech) if args.tech else ["cmos2d", "tsv3d", "m3d", "sn3d"]
    if len(techs) < 2:
        raise UsageError("compare needs at least two technologies")
    gates = _parse_gates_list(args.gates) if args.gates else [5e6, 1e7, 2e7]
    doc = compare(library, techs, gates, _MODE_FLAGS[args.mode], source)
    _emit_document(doc, args.format, args.out, render_compare)
    return EXIT_OK


def _run_export(args: argparse.Namespace) -> int:
    if args.samples < 2:
        raise UsageError(f"sample count must be >= 2, got {args.samples}")
    source = _library_source(args.library)
    library = load_library(source)
    gates = _parse_gates(args.gates)
    header, rows = export_distribution(library, args.tech, gates, args.samples)

    def write(handle) -> None:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) for v in row])

    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as handle:
            write(handle)
    else:
        write(sys.stdout)
    return EXIT_OK


def _run_calibrate(args: argparse.Namespace) -> int:
    source = args.library or BUILTIN_UNCALIBRATED
    library = load_library(source)
    adjusted, report = calibrate(library, CalibrationTargets(), seed=args.seed)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            yaml.safe_dump(library_to_dict(adjusted), handle, sort_keys=False)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as handle:
            yaml.safe_dump(report.to_dict(), handle, sort_keys=False)
    doc = report.to_dict()
    if args.format == "machine":
        sys.stdout.write(json.dumps(doc, indent=2) + "\n")
    else:
        sys.stdout.write(yaml.safe_dump(doc, sort_keys=False))
    return EXIT_OK


def _fail(exc: Exception, code: int) -> int:
    record = {"error": {"exit_code": code, "type": type(exc).__name__, "message": str(exc)}}
    sys.stderr.write(json.dumps(record) + "\n")
    return code


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse already printed its diagnostics; normalize the exit code.
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK

    handlers = {
        "project": _run_project,
        "compare": _run_compare,
        "export-distribution": _run_export,
        "calibrate": _run_calibrate,
    }
    try:
        return handlers[args.command](args)
    except UsageError as exc:
        return _fail(exc, EXIT_USAGE)
    except ConfigError as exc:
        return _fail(exc, EXIT_CONFIG)
    except StackcostError as exc:
        return _fail(exc, EXIT_MODEL)


if __name__ == "__main__":
    sys.exit(main())
