"""Command line wrapper: `plots <figure-kind> --csv <path> --out <path>`."""

import argparse
import sys

from .figures import SCHEMAS, FigureSpec, PlotError, render


def _parse_args(argv):
    ap = argparse.ArgumentParser(
        prog="plots",
        description="Render one experiment CSV to a static figure.")
    ap.add_argument("kind", choices=sorted(SCHEMAS), help="figure kind")
    ap.add_argument("--csv", required=True, help="input CSV path")
    ap.add_argument("--out", required=True, help="output image path")
    ap.add_argument("--ref-slope", dest="ref_slopes", type=float,
                    action="append", default=[], metavar="X",
                    help="overlay a labeled h^X guide (repeatable)")
    return ap.parse_args(argv)


def main(argv=None):
    args = _parse_args(argv)
    spec = FigureSpec(csv_path=args.csv, kind=args.kind,
                      out_path=args.out, ref_slopes=tuple(args.ref_slopes))
    try:
        render(spec)
    except PlotError as e:
        print("error: %s" % e, file=sys.stderr)
        return 2
    except OSError as e:
        print("error: %s" % e, file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
