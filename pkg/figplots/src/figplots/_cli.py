"""Shared argument handling for the per-preset scripts."""

import argparse
import sys
from pathlib import Path

from . import PlotSpec, SchemaError, render


def run(preset: str, description: str, argv=None) -> int:
    parser = argparse.ArgumentParser(prog=f"figplots.{preset}", description=description)
    parser.add_argument("csv", type=Path, help="input CSV produced by the matching preset")
    parser.add_argument(
        "--out",
        type=Path,
        default=None,
        help="output image path (default: the CSV path with a .png suffix)",
    )
    parser.add_argument("--title", default=None, help="optional figure title")
    args = parser.parse_args(argv)
    out = args.out if args.out is not None else args.csv.with_suffix(".png")
    spec = PlotSpec(preset=preset, csv_path=args.csv, out_path=out, title=args.title)
    try:
        written = render(spec)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: cannot write {out}: {exc.strerror or exc}", file=sys.stderr)
        return 1
    print(written)
    return 0
