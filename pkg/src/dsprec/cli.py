"""Command-line interface router for dsprec.

Routes commands to the appropriate subcommand handlers.
"""

from __future__ import annotations

import argparse
import sys

from rich.markup import escape

from .config import VERSION
from .utils.console import print_error, print_msg, red
from .utils.exceptions import DsprecError


def main(argv: list[str] | None = None) -> int:
    """Main entry point for the dsprec CLI.

    Args:
        argv: Command line arguments (uses sys.argv if None)

    Returns:
        Exit code
    """
    try:
        return _main(argv)
    except DsprecError as e:
        print_error(red(f"Error: {escape(str(e))}"))
        return e.exit_code


def _main(argv: list[str] | None = None) -> int:
    """Internal main function that may raise exceptions."""
    parser = argparse.ArgumentParser(
        prog="dsprec",
        description="Dual space preconditioned gradient descent experiments",
    )
    parser.add_argument(
        "-V",
        "--version",
        action="version",
        version=f"dsprec: {VERSION}",
    )

    subparsers = parser.add_subparsers(dest="command", metavar="command")

    subparsers.add_parser("generate", help="Generate a synthetic instance file")
    subparsers.add_parser("run", help="Run the preconditioned iteration once")
    subparsers.add_parser("sweep-eps", help="Sweep eps and compare limits to reference solutions")
    subparsers.add_parser("sweep-eta", help="Sweep the step size and compare limits to W_ref")
    subparsers.add_parser("verify", help="Run the identity and bound verification suite")
    subparsers.add_parser("refsolve", help="Compute min-norm interpolating reference solutions")

    if argv is None:
        argv = sys.argv[1:]

    if argv and argv[0] == "version":
        print_msg(f"dsprec: {VERSION}")
        return 0

    if argv and argv[0] == "help":
        parser.print_help()
        return 0

    # Parse only the first argument to get the command
    parsed, remaining = parser.parse_known_args(argv[:1])

    if not parsed.command:
        parser.print_help()
        return 0

    command = parsed.command
    args = argv[1:]

    match command:
        case "generate":
            from .commands.generate import run

            return run(args)

        case "run":
            from .commands.run import run

            return run(args)

        case "sweep-eps":
            from .commands.sweep_eps import run

            return run(args)

        case "sweep-eta":
            from .commands.sweep_eta import run

            return run(args)

        case "verify":
            from .commands.verify import run

            return run(args)

        case "refsolve":
            from .commands.refsolve import run

            return run(args)

        case _:
            print_error(red("Error: invalid command"))
            parser.print_help(sys.stderr)
            return 2


if __name__ == "__main__":
    sys.exit(main())
