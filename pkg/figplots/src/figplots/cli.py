"""figplots command line: render a figure analog from an experiment output dir.

    figplots plot --in results/fig2 --kind spacing --out fig2_s.png
"""

from __future__ import annotations

import argparse
import sys

from .plotting import KINDS, PlotError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="figplots", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    plot = sub.add_parser("plot", help="render one figure from a results directory")
    plot.add_argument("--in", dest="in_dir", required=True, help="experiment output directory")
    plot.add_argument("--kind", required=True, choices=KINDS, help="figure kind")
    plot.add_argument("--out", required=True, help="output image path (png/pdf/svg)")
    plot.add_argument("--overlay", action="append", default=None,
                      help="overlay curve name (repeatable); default: all curves found")

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0

    try:
        out = render(args.in_dir, args.kind, args.out, overlays=args.overlay)
    except PlotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
