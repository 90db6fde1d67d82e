"""dsprec verify command implementation.

Runs the identity and bound checks on the configured instance, prints one
line per check and exits nonzero when any of them fails.
"""

from __future__ import annotations

import argparse
import sys

from rich.table import Table

from ..experiments import build_manifest
from ..optimizer import check_step
from ..suite import CheckResult, run_verify_suite
from ..utils.console import check_style, console, green, print_msg, red
from ..utils.io import write_manifest
from .common import add_common_arguments, load_config


def create_parser() -> argparse.ArgumentParser:
    """Create argument parser for dsprec verify."""
    parser = argparse.ArgumentParser(
        prog="dsprec verify",
        description="Check the dual space identities and convergence bounds",
    )
    parser.add_argument("--eta", type=float, default=None, help="Step size")
    add_common_arguments(parser)
    return parser


def print_checks(results: list[CheckResult]) -> None:
    table = Table(show_header=True, header_style="bold", box=None)
    table.add_column("CHECK", no_wrap=True)
    table.add_column("RESULT", no_wrap=True)
    table.add_column("VALUE", justify="right")
    table.add_column("DETAIL")
    for r in results:
        table.add_row(
            r.name,
            "pass" if r.passed else "FAIL",
            f"{r.value:.3e}",
            r.detail,
            style=check_style(r.passed),
        )
    console.print(table, highlight=False)


def run(args: list[str] | None = None) -> int:
    """Run the dsprec verify command.

    Args:
        args: Command line arguments (uses sys.argv if None)

    Returns:
        0 if every check passed, 1 otherwise
    """
    parser = create_parser()
    parsed = parser.parse_args(args)
    config = load_config(parsed)
    if parsed.eta is not None:
        config.run = config.run.with_eta(parsed.eta)

    p = config.problem.instance()
    # An inadmissible step under strict_eta is a usage error, not a failed check
    check_step(p, config.preconditioner.build(), config.run)

    results = run_verify_suite(config, p)
    print_checks(results)

    manifest = build_manifest(config, p, command="verify", checks=[r.as_dict() for r in results])
    path = write_manifest(config.output_dir / "verify.json", manifest)

    failed = [r.name for r in results if not r.passed]
    if failed:
        print_msg(red(f"{len(failed)} of {len(results)} checks failed: {', '.join(failed)}"))
        return 1
    print_msg(green(f"All {len(results)} checks passed, wrote {path}"))
    return 0


if __name__ == "__main__":
    sys.exit(run())
