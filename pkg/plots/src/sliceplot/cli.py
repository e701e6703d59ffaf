"""Batch figure rendering for simulator run directories."""

from __future__ import annotations

import argparse
import glob
import os
import sys

from .render import KINDS, FigureSpec, SchemaError, render

# run-directory files handled by --all, with their figure kinds
RUN_DIR_FILES = (
    ("learning_curve.csv", "reward"),
    ("queue_trace.csv", "queue"),
    ("rates_cdf.csv", "cdf"),
    ("violations_compare.csv", "violations"),
    ("tracking.csv", "tracking"),
)


def build_parser():
    p = argparse.ArgumentParser(
        prog="slicesim-plot",
        description="Render slicesim CSV outputs as PNG figures")
    p.add_argument("--kind", choices=KINDS, help="figure kind for --input")
    p.add_argument("--input", help="input CSV")
    p.add_argument("--output", help="output image path")
    p.add_argument("--all", action="store_true",
                   help="render every known CSV in --run-dir")
    p.add_argument("--run-dir", help="run directory for --all")
    p.add_argument("--title", help="figure title override")
    return p


def render_all(run_dir):
    rendered = []
    for name, kind in RUN_DIR_FILES:
        path = os.path.join(run_dir, name)
        if os.path.exists(path):
            out = os.path.join(run_dir, name.replace(".csv", ".png"))
            render(FigureSpec(kind=kind, input_path=path, output_path=out))
            rendered.append(out)
    for path in sorted(glob.glob(os.path.join(run_dir, "sweep_*.csv"))):
        out = path.replace(".csv", ".png")
        render(FigureSpec(kind="sweep", input_path=path, output_path=out))
        rendered.append(out)
    return rendered


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.all:
            if not args.run_dir:
                print("--all needs --run-dir", file=sys.stderr)
                return 1
            rendered = render_all(args.run_dir)
            if not rendered:
                print(f"no known CSVs in {args.run_dir}", file=sys.stderr)
                return 1
            for path in rendered:
                print(path)
            return 0
        if not (args.kind and args.input and args.output):
            print("need --kind, --input and --output (or --all --run-dir)",
                  file=sys.stderr)
            return 1
        render(FigureSpec(kind=args.kind, input_path=args.input,
                          output_path=args.output, title=args.title))
        print(args.output)
        return 0
    except (SchemaError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
