"""loanfigs: render one figure from an aggregation CSV.

    loanfigs --kind temporal --metric delta_sr --input traces.csv --out f.png

Exit codes: 0 success, 1 bad spec/input, 2 runtime error.
"""

from __future__ import annotations

import argparse
import sys

from .render import FigureInputError, FigureSpec, render


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="loanfigs", description=__doc__)
    ap.add_argument("--kind", required=True, choices=["temporal", "heatmap", "violin"])
    ap.add_argument("--metric", required=True)
    ap.add_argument("--input", required=True)
    ap.add_argument("--out", required=True)
    args = ap.parse_args(argv)
    try:
        render(FigureSpec(kind=args.kind, metric=args.metric,
                          input=args.input, out=args.out))
    except FigureInputError as exc:
        print(f"loanfigs: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        print(f"loanfigs: error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
