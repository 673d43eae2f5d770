"""Command line for the plotting component.

Consumes the CSV contract of the simulation CLI:

    reldiff-plots --in out/ --out figure1.png
    reldiff-plots --which overlay --in out/ --out overlay.png --linear-y
"""

import argparse
import sys
from pathlib import Path

from .figures import PlotInputError, PlotSpec, render_figure1, render_overlay

_SOURCES = {"figure1": "figure1.csv", "overlay": "equilibrium_density.csv"}


def build_parser():
    parser = argparse.ArgumentParser(prog="reldiff-plots", description="Render figures from reldiff CSV output")
    parser.add_argument("--in", dest="in_dir", type=Path, required=True, help="directory with CSV outputs")
    parser.add_argument("--out", dest="out_file", type=Path, required=True, help="image file to write")
    parser.add_argument("--which", choices=sorted(_SOURCES), default="figure1", help="figure to render")
    parser.add_argument("--linear-y", action="store_true", help="linear instead of log y axis")
    parser.add_argument("--title", default=None)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    spec = PlotSpec(
        source=args.in_dir / _SOURCES[args.which],
        output=args.out_file,
        y_scale="linear" if args.linear_y else "log",
        title=args.title,
    )
    try:
        if args.which == "figure1":
            out = render_figure1(spec)
        else:
            out = render_overlay(spec)
    except PlotInputError as exc:
        print(f"plot input error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
