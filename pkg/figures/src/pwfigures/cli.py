"""Command line: one panel per invocation."""
from __future__ import annotations

import argparse
import sys

from .render import KINDS, FigureJob, Style, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="Render one figure panel from a simulation run directory."
    )
    parser.add_argument("--run", required=True, help="run directory")
    parser.add_argument("--kind", required=True, choices=KINDS, help="panel kind")
    parser.add_argument("--out", required=True, help="output image file")
    parser.add_argument("--cmap", default=None, help="matplotlib colormap override")
    parser.add_argument(
        "--norm",
        type=float,
        default=None,
        help="spectrogram normalization constant (default 50)",
    )
    args = parser.parse_args(argv)
    style = Style()
    if args.cmap:
        style.cmap = args.cmap
    if args.norm is not None:
        style.normalization = args.norm
    try:
        out = render(FigureJob(run_dir=args.run, kind=args.kind, out=args.out, style=style))
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
