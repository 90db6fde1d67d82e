"""dsprec sweep-eps command implementation.

Runs the preconditioned iteration once per eps and records how far each
limit lands from the min-norm reference solutions and the GD limit.
"""

from __future__ import annotations

import argparse
import sys

from ..experiments import sweep_eps
from .common import add_common_arguments, load_config, write_sweep_outputs


def create_parser() -> argparse.ArgumentParser:
    """Create argument parser for dsprec sweep-eps."""
    parser = argparse.ArgumentParser(
        prog="dsprec sweep-eps",
        description="Sweep the preconditioner eps at a fixed step size",
    )
    parser.add_argument(
        "--values",
        type=float,
        nargs="+",
        default=None,
        help="Eps grid (default: the [sweep] values or 0.1 .. 10)",
    )
    parser.add_argument("--eta", type=float, default=None, help="Step size")
    add_common_arguments(parser)
    return parser


def run(args: list[str] | None = None) -> int:
    """Run the dsprec sweep-eps command.

    Args:
        args: Command line arguments (uses sys.argv if None)

    Returns:
        Exit code
    """
    parser = create_parser()
    parsed = parser.parse_args(args)
    config = load_config(parsed)

    if parsed.values is not None:
        config.sweep.parameter = "eps"
        config.sweep.values = parsed.values
    if parsed.eta is not None:
        config.run = config.run.with_eta(parsed.eta)
    config.validate()

    p = config.problem.instance()
    result = sweep_eps(config, p)
    write_sweep_outputs(
        config,
        p,
        result,
        name="sweep_eps",
        title=f"{config.preconditioner.name}, eta={config.run.eta:g}: distance of the limit vs eps",
    )
    return 0


if __name__ == "__main__":
    sys.exit(run())
