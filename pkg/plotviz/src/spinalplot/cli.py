"""spinal-plot: render sweep CSVs to PNG/SVG.

Either point it at a JSON spec file (--spec) whose keys mirror PlotSpec,
or pass flags directly.  Exit codes: 0 success, 2 bad spec or input schema.
"""

from __future__ import annotations

import argparse
import json
import sys

from .render import PlotSpec, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinal-plot",
        description="Plot BLER sweep CSVs with floor/threshold overlays",
    )
    parser.add_argument("--spec", help="JSON file with PlotSpec fields")
    parser.add_argument("--input", action="append", default=None,
                        help="sweep CSV path (repeatable)")
    parser.add_argument("--label", action="append", default=None,
                        help="series label (repeatable, pairs with --input)")
    parser.add_argument("--out", help="output image (.png or .svg)")
    parser.add_argument("--xlim", help="x axis range as 'lo,hi'")
    parser.add_argument("--ylim", help="y axis range as 'lo,hi'")
    parser.add_argument("--no-floor", action="store_true",
                        help="suppress the error-floor line")
    parser.add_argument("--no-threshold", action="store_true",
                        help="suppress the SNR-threshold line")
    return parser


def _parse_range(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError(f"range must be 'lo,hi', got {text!r}")
    return float(parts[0]), float(parts[1])


def spec_from_args(args: argparse.Namespace) -> PlotSpec:
    fields: dict = {}
    if args.spec:
        with open(args.spec, encoding="utf-8") as fh:
            fields.update(json.load(fh))
    if args.input:
        fields["inputs"] = args.input
    if args.label:
        fields["labels"] = args.label
    if args.out:
        fields["out"] = args.out
    if args.xlim:
        fields["xlim"] = _parse_range(args.xlim)
    if args.ylim:
        fields["ylim"] = _parse_range(args.ylim)
    if args.no_floor:
        fields["show_floor"] = False
    if args.no_threshold:
        fields["show_threshold"] = False
    if "xlim" in fields and fields["xlim"] is not None:
        fields["xlim"] = tuple(fields["xlim"])
    if "ylim" in fields and fields["ylim"] is not None:
        fields["ylim"] = tuple(fields["ylim"])
    if "inputs" not in fields:
        raise ValueError("no inputs given (use --input or a --spec file)")
    return PlotSpec(**fields)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = spec_from_args(args)
        out = render(spec)
    except (SchemaError, ValueError, OSError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
