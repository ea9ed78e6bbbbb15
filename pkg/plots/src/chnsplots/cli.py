"""Command-line entry points: render-snapshot and render-series."""

import argparse
import sys

from .render import RenderError, render_snapshot, render_timeseries
from .snapshot_io import SnapshotError, read_snapshot


def main_snapshot(argv=None):
    parser = argparse.ArgumentParser(
        prog="render-snapshot",
        description="Render the three-panel figure for one snapshot file")
    parser.add_argument("snapshot")
    parser.add_argument("--out", default=None,
                        help="output image path (default: <snapshot>.png)")
    args = parser.parse_args(argv)
    out = args.out or args.snapshot + ".png"
    try:
        snap = read_snapshot(args.snapshot)
        ranges = render_snapshot(snap, out)
    except (SnapshotError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    spans = ", ".join(f"{k} in [{lo:.4g}, {hi:.4g}]"
                      for k, (lo, hi) in ranges.items())
    print(f"wrote {out} (t = {snap.t:.6g}; {spans})")
    return 0


def main_series(argv=None):
    parser = argparse.ArgumentParser(
        prog="render-series",
        description="Plot diagnostics CSV columns against time")
    parser.add_argument("csv")
    parser.add_argument("--cols", required=True,
                        help="comma-separated column names")
    parser.add_argument("--out", default=None,
                        help="output image path (default: <csv>.png)")
    parser.add_argument("--log", action="store_true",
                        help="logarithmic value axis")
    args = parser.parse_args(argv)
    out = args.out or args.csv + ".png"
    columns = [c for c in args.cols.split(",") if c]
    try:
        render_timeseries(args.csv, columns, out, logscale=args.log)
    except (RenderError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main_snapshot())
