"""Command-line entry point.

    fedsysid-figures render --csv PATH --kind KIND --group COL --out PATH
                            [--linear-y]

KIND is one of: error_vs_round, error_vs_sqrtM, error_vs_local_updates.
COL is one of: M, N_i, epsilon, K_i.  The output format follows the --out
extension (.svg, .pdf, .png).

Exit status: 0 on success, 2 for usage/schema problems (bad arguments,
missing or malformed CSV), 1 for data problems (nothing to plot, fit
impossible).  Every failure prints one line to stderr:
``error: <Kind>: <message>``.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .csvdata import GROUP_COLUMNS, EmptyDataError, SchemaError, load_rows
from .render import KINDS, render, save

_USAGE_EXIT = 2
_DATA_EXIT = 1


class _SingleLineParser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: D102 - argparse hook
        raise _UsageError(f"arguments: {message}")


class _UsageError(ValueError):
    pass


def _build_parser() -> argparse.ArgumentParser:
    parser = _SingleLineParser(prog="fedsysid-figures", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    render_cmd = sub.add_parser("render", help="render a figure from a harness CSV")
    render_cmd.add_argument("--csv", required=True, help="harness CSV to read")
    render_cmd.add_argument("--kind", required=True, choices=KINDS)
    render_cmd.add_argument("--group", required=True, choices=GROUP_COLUMNS)
    render_cmd.add_argument("--out", required=True, help="figure file to write")
    render_cmd.add_argument(
        "--linear-y", action="store_true", help="linear y-axis (default: log)"
    )
    return parser


def _fail(exc: BaseException, code: int) -> int:
    message = " ".join(str(exc).split())
    print(f"error: {type(exc).__name__}: {message}", file=sys.stderr)
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        rows = load_rows(args.csv)
        result = render(args.kind, rows, args.group, linear_y=args.linear_y)
        save(result, args.out)
        print(
            f"wrote {args.kind} ({len(result.curve_labels)} curve"
            f"{'s' if len(result.curve_labels) != 1 else ''}, "
            f"{result.n_rows} rows) to {args.out}"
        )
        return 0
    except (_UsageError, SchemaError) as exc:
        return _fail(exc, _USAGE_EXIT)
    except (FileNotFoundError, OSError) as exc:
        return _fail(exc, _USAGE_EXIT)
    except (EmptyDataError, ValueError) as exc:
        return _fail(exc, _DATA_EXIT)


if __name__ == "__main__":
    sys.exit(main())
