"""`plots render --run <dir> --kind <kind> --out <path>`."""

from __future__ import annotations

import argparse
import sys

from .figures import KINDS, RENDERERS
from .reader import (MissingColumnError, NoDataError, SchemaMismatchError,
                     load_run)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plots",
        description="Figures from fractrans run directories")
    sub = parser.add_subparsers(dest="command", required=True)
    render = sub.add_parser("render")
    render.add_argument("--run", required=True,
                        help="run directory (series.csv / summary.json)")
    render.add_argument("--kind", required=True, choices=KINDS)
    render.add_argument("--out", required=True, help="output image path")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        run = load_run(args.run)
        RENDERERS[args.kind](run, args.out)
    except (SchemaMismatchError, MissingColumnError, NoDataError,
            FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
