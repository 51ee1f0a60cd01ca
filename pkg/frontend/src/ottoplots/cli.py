"""Command line: otto-plot --kind KIND --in CSV... --out IMG"""

from __future__ import annotations

import argparse
import sys

from .figures import FIGURE_KINDS, FigureSpec, PlotDataError, render


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="otto-plot",
        description="Render figures from engine-simulator CSV outputs (PNG or SVG).",
    )
    ap.add_argument("--kind", required=True, choices=FIGURE_KINDS)
    ap.add_argument("--in", dest="inputs", required=True, nargs="+", metavar="CSV")
    ap.add_argument("--out", required=True, metavar="IMG", help="output .png or .svg")
    args = ap.parse_args(argv)
    try:
        path = render(FigureSpec(kind=args.kind, inputs=tuple(args.inputs), output=args.out))
    except PlotDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 4
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
