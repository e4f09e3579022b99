"""Script entry points: plot-traces and plot-rmse."""
from __future__ import annotations

import argparse
import sys

from .rmse import render_rmse
from .schema import SchemaError
from .traces import TraceBundle, render_traces


def plot_traces_main(argv=None) -> int:
    p = argparse.ArgumentParser(
        prog="plot-traces",
        description="3x3 estimate-vs-truth grid (velocity, orientation, "
                    "position) from trace and truth CSVs.")
    p.add_argument("--truth", required=True, help="truth CSV path")
    p.add_argument("--trace", action="append", default=[],
                   help="estimate trace CSV (repeatable; omit for truth only)")
    p.add_argument("--label", action="append", default=[],
                   help="legend label per --trace (defaults to the file name)")
    p.add_argument("--frame", action="append", default=[],
                   choices=["relative", "world"],
                   help="truth frame per --trace (default relative)")
    p.add_argument("--window", nargs=2, type=float, metavar=("START", "END"),
                   default=None, help="time window in seconds")
    p.add_argument("--out", required=True, help="output image (.png/.svg/...)")
    args = p.parse_args(argv)

    window = tuple(args.window) if args.window is not None else None
    try:
        if args.trace:
            bundles = []
            for k, trace in enumerate(args.trace):
                label = args.label[k] if k < len(args.label) else trace
                frame = args.frame[k] if k < len(args.frame) else "relative"
                bundles.append(TraceBundle(args.truth, trace, label, window,
                                           frame))
        else:
            bundles = [TraceBundle(args.truth, None, "truth", window)]
        out = render_traces(bundles, args.out)
    except (SchemaError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


def plot_rmse_main(argv=None) -> int:
    p = argparse.ArgumentParser(
        prog="plot-rmse",
        description="Grouped RMSE bar chart from a compare_summary.csv.")
    p.add_argument("--summary", required=True, help="compare_summary.csv path")
    p.add_argument("--out", required=True, help="output image (.png/.svg/...)")
    args = p.parse_args(argv)
    try:
        out = render_rmse(args.summary, args.out)
    except (SchemaError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0
