"""dsprec sweep-eta command implementation.

Runs the preconditioned iteration once per step size at a fixed eps. The
limit at eta = 0.005 is the reference every other limit is measured against.
"""

from __future__ import annotations

import argparse
import sys

from ..config import REFERENCE_ETA
from ..experiments import sweep_eta
from ..utils.io import CSV_COLUMNS, ETA_COLUMNS
from .common import add_common_arguments, load_config, write_sweep_outputs


def create_parser() -> argparse.ArgumentParser:
    """Create argument parser for dsprec sweep-eta."""
    parser = argparse.ArgumentParser(
        prog="dsprec sweep-eta",
        description="Sweep the step size at a fixed preconditioner eps",
    )
    parser.add_argument(
        "--values",
        type=float,
        nargs="+",
        default=None,
        help="Step size grid (default: the [sweep] values or 0.005 .. 0.1)",
    )
    parser.add_argument("--eps", type=float, default=None, help="Preconditioner eps")
    add_common_arguments(parser)
    return parser


def run(args: list[str] | None = None) -> int:
    """Run the dsprec sweep-eta command.

    Args:
        args: Command line arguments (uses sys.argv if None)

    Returns:
        Exit code
    """
    parser = create_parser()
    parsed = parser.parse_args(args)
    config = load_config(parsed)

    if parsed.values is not None:
        config.sweep.parameter = "eta"
        config.sweep.values = parsed.values
    if parsed.eps is not None:
        config.preconditioner.eps = parsed.eps
    config.validate()

    p = config.problem.instance()
    result = sweep_eta(config, p)
    write_sweep_outputs(
        config,
        p,
        result,
        name="sweep_eta",
        title=f"{config.preconditioner.build().label}: distance of the limit vs eta (W_ref at eta={REFERENCE_ETA:g})",
        columns=CSV_COLUMNS + ETA_COLUMNS,
    )
    return 0


if __name__ == "__main__":
    sys.exit(run())
