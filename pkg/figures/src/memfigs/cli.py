"""Command line: one subcommand per figure kind. Exit 0 on success,
nonzero with a message on stderr for missing or invalid input."""

from __future__ import annotations

import argparse
import sys

from .render import FigureSpec, RenderError, render


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="memfigs")
    sub = parser.add_subparsers(dest="kind", required=True)

    p = sub.add_parser("spike-profile",
                       help="I-t curve with the four decay-time markers")
    p.add_argument("--trace", required=True)
    p.add_argument("--metrics", required=True)
    p.add_argument("--column", default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("network-trace",
                       help="current vs time with a zero line")
    p.add_argument("--trace", required=True)
    p.add_argument("--column", action="append", default=None,
                   help="branch column; repeat to sum several")
    p.add_argument("--out", required=True)

    p = sub.add_parser("hysteresis-loops",
                       help="overlayed V-I loops, one trace per frequency")
    p.add_argument("--trace", action="append", required=True)
    p.add_argument("--v-column", default=None)
    p.add_argument("--i-column", default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("tmaze-learning-curve",
                       help="rolling accuracy with the switch marked")
    p.add_argument("--log", required=True)
    p.add_argument("--summary", default=None)
    p.add_argument("--switch-at", type=int, default=None)
    p.add_argument("--window", type=int, default=10)
    p.add_argument("--out", required=True)
    return parser


def _spec_from_args(args) -> FigureSpec:
    if args.kind == "spike-profile":
        return FigureSpec("spike_profile",
                          {"trace": args.trace, "metrics": args.metrics,
                           "column": args.column}, args.out)
    if args.kind == "network-trace":
        inputs = {"trace": args.trace}
        if args.column and len(args.column) > 1:
            inputs["columns"] = args.column
        elif args.column:
            inputs["column"] = args.column[0]
        return FigureSpec("network_trace", inputs, args.out)
    if args.kind == "hysteresis-loops":
        return FigureSpec("hysteresis_loops",
                          {"traces": args.trace, "v_column": args.v_column,
                           "i_column": args.i_column}, args.out)
    inputs = {"log": args.log, "window": args.window}
    if args.summary:
        inputs["summary"] = args.summary
    if args.switch_at is not None:
        inputs["switch_at"] = args.switch_at
    return FigureSpec("tmaze_learning_curve", inputs, args.out)


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        info = render(_spec_from_args(args))
    except RenderError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    print(f"wrote {info['output']} ({info['width_px']}x{info['height_px']})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
