"""Command line entry point: render figures from an artifact directory."""

import argparse
import sys

from .artifacts import ArtifactError
from .render import KINDS, FigureSpec, render


class _UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="qspindyn-figures",
        description="Render qspindyn CSV/JSON artifacts into figures.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    r = sub.add_parser("render", help="render one figure from an artifact directory")
    r.add_argument("--artifact-dir", required=True, help="directory written by 'qspindyn run'")
    r.add_argument("--figure", required=True, choices=KINDS)
    r.add_argument("--out", required=True, help="output image path (.png)")
    r.add_argument("--dpi", type=int, default=150)
    r.add_argument(
        "--panel-label",
        action="append",
        dest="panel_labels",
        metavar="LABEL",
        help="override one panel label; repeat once per panel",
    )
    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        spec = FigureSpec(
            kind=args.figure,
            artifact_dir=args.artifact_dir,
            out_path=args.out,
            panel_labels=args.panel_labels,
            dpi=args.dpi,
        )
        out = render(spec)
    except (_UsageError, ArtifactError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
