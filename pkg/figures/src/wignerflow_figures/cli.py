"""`wignerflow-figures render --panel A|B --in DIR --out FILE.png`."""

from __future__ import annotations

import argparse
import json
import sys

from .io import MissingInputError
from .render import FigureSpec, render


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="wignerflow-figures",
                                     description="Render phase-space flow panels")
    sub = parser.add_subparsers(dest="command", required=True)
    rp = sub.add_parser("render", help="render one panel from artifact files")
    rp.add_argument("--panel", required=True, choices=["A", "B"])
    rp.add_argument("--in", dest="indir", required=True,
                    help="directory with wignerflow CSV/JSON outputs")
    rp.add_argument("--out", required=True, help="output image path")
    rp.add_argument("--arrow-step", type=int, default=10,
                    help="grid stride between arrows")
    rp.add_argument("--cmap", default="RdBu_r")
    rp.add_argument("--dpi", type=int, default=150)
    args = parser.parse_args(argv)

    try:
        spec = FigureSpec(indir=args.indir, panel=args.panel, cmap=args.cmap,
                          arrow_step=args.arrow_step, dpi=args.dpi)
        stats = render(spec, args.out)
    except (MissingInputError, ValueError) as exc:
        json.dump({"error": "input", "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 2
    print(json.dumps({"panel": args.panel, "out": args.out, **stats}))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
