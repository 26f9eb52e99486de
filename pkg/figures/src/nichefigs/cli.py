"""Command line front end: render figure specs, validate output files."""

from __future__ import annotations

import argparse
import json
import sys

from .render import render_file
from .schemas import validate_path
from .series import SchemaError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="figures",
        description="Render figures from experiment CSV/JSON outputs "
                    "and validate those outputs.")
    commands = parser.add_subparsers(dest="command", required=True)

    render = commands.add_parser(
        "render", help="render one figure from a spec JSON")
    render.add_argument("spec", help="figure spec JSON path")

    validate = commands.add_parser(
        "validate",
        help="check CSV/snapshot files against the documented layouts")
    validate.add_argument("paths", nargs="+", help="files to check")
    return parser


def main(argv: list[str] | None = None) -> int:
    arguments = _build_parser().parse_args(argv)
    try:
        if arguments.command == "render":
            print(json.dumps(render_file(arguments.spec)))
            return 0
        reports = [validate_path(path) for path in arguments.paths]
        total = sum(len(report.violations) for report in reports)
        print(json.dumps({
            "reports": [report.to_dict() for report in reports],
            "total_violations": total,
        }))
        return 0 if total == 0 else 1
    except (SchemaError, OSError) as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
