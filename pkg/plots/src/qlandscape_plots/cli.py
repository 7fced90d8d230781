"""Command line for rendering sweep CSVs: flag-driven or via a TOML spec.

Exit codes: 0 success, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .csvdata import MissingColumnError
from .render import PlotSpec, dump_points, render


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qlandscape-plot",
        description="Render qlandscape sweep CSVs into scaling or scatter figures.",
    )
    parser.add_argument("spec", nargs="?", help="TOML plot spec (alternative to flags)")
    parser.add_argument("--csv", help="input sweep CSV")
    parser.add_argument("--kind", choices=("scaling", "scatter"), default="scaling")
    parser.add_argument("--x", default="n")
    parser.add_argument("--y", default="variance")
    parser.add_argument("--group-by", default="depth,scheme,axes,r,cost",
                        help="comma-separated grouping columns")
    parser.add_argument("--out", default="figure.svg", help="output image (.svg or .png)")
    parser.add_argument("--title", default="")
    parser.add_argument("--no-log-y", action="store_true")
    parser.add_argument("--log-x", action="store_true")
    parser.add_argument("--dump-points", action="store_true",
                        help="print the plotted values exactly as read from the CSV")
    return parser


def _spec_from_toml(path: Path) -> PlotSpec:
    with open(path, "rb") as handle:
        data = tomllib.load(handle)
    plot = data.get("plot", data)
    csv = plot.get("csv")
    if not csv:
        raise ValueError("plot spec needs a 'csv' key")
    csv_path = Path(csv)
    if not csv_path.is_absolute():
        csv_path = path.parent / csv_path
    out = Path(plot.get("out", "figure.svg"))
    if not out.is_absolute():
        out = path.parent / out
    return PlotSpec(
        csv=csv_path,
        kind=plot.get("kind", "scaling"),
        x=plot.get("x", "n"),
        y=plot.get("y", "variance"),
        group_by=tuple(plot.get("group_by", ["depth", "scheme", "axes", "r", "cost"])),
        log_x=bool(plot.get("log_x", False)),
        log_y=bool(plot.get("log_y", True)),
        out=out,
        title=plot.get("title", ""),
    )


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        if args.spec:
            spec_path = Path(args.spec)
            if not spec_path.exists():
                raise FileNotFoundError(f"plot spec not found: {spec_path}")
            spec = _spec_from_toml(spec_path)
        else:
            if not args.csv:
                print("either a spec file or --csv is required", file=sys.stderr)
                return 2
            csv_path = Path(args.csv)
            if not csv_path.exists():
                raise FileNotFoundError(f"CSV not found: {csv_path}")
            spec = PlotSpec(
                csv=csv_path,
                kind=args.kind,
                x=args.x,
                y=args.y,
                group_by=tuple(c.strip() for c in args.group_by.split(",") if c.strip()),
                log_x=args.log_x,
                log_y=not args.no_log_y,
                out=Path(args.out),
                title=args.title,
            )
        series = render(spec)
        if args.dump_points:
            text = dump_points(series)
            if text:
                print(text)
        print(f"wrote {spec.out}", file=sys.stderr)
        return 0
    except (FileNotFoundError, MissingColumnError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main())
