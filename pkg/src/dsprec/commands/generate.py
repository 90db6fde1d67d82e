"""dsprec generate command implementation.

Draws a synthetic instance and writes it in the text instance format.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..problem import generate, interpolation_residual
from ..utils.console import green, print_msg, yellow
from ..utils.io import instance_checksum, load_instance, save_instance
from ..utils.log import get_logger
from .common import add_common_arguments, load_config

logger = get_logger("generate")

DEFAULT_NAME = "instance.txt"


def create_parser() -> argparse.ArgumentParser:
    """Create argument parser for dsprec generate."""
    parser = argparse.ArgumentParser(
        prog="dsprec generate",
        description="Generate a synthetic overparameterized instance",
    )
    parser.add_argument(
        "path",
        nargs="?",
        type=Path,
        default=None,
        help=f"Instance file to write (default: <out>/{DEFAULT_NAME})",
    )
    parser.add_argument("-n", type=int, default=None, help="Number of samples")
    parser.add_argument("-d", type=int, default=None, help="Number of features")
    parser.add_argument("-k", type=int, default=None, help="Number of outputs")
    parser.add_argument("--noise", type=float, default=None, help="Label noise level")
    add_common_arguments(parser)
    return parser


def run(args: list[str] | None = None) -> int:
    """Run the dsprec generate command.

    Args:
        args: Command line arguments (uses sys.argv if None)

    Returns:
        Exit code
    """
    parser = create_parser()
    parsed = parser.parse_args(args)
    config = load_config(parsed)

    problem = config.problem
    if problem.path is not None:
        logger.info("ignoring [problem] path %s, generating a fresh instance", problem.path)
    for field in ("n", "d", "k", "noise"):
        value = getattr(parsed, field)
        if value is not None:
            setattr(problem, field, value)

    spec = problem.spec()
    p = generate(spec)
    path = parsed.path or config.output_dir / DEFAULT_NAME
    save_instance(p, path)

    # The file is only useful if it reads back to the same instance
    reloaded = load_instance(path)
    checksum = instance_checksum(reloaded)
    if checksum != instance_checksum(p):
        print_msg(yellow(f"Warning: {path} does not read back identically"))
        return 1
    if reloaded.w_true is not None and spec.noise == 0:
        logger.debug("W_true residual %.3e", interpolation_residual(reloaded, reloaded.w_true))

    print_msg(green(f"Wrote {path} (n={p.n}, d={p.d}, k={p.k}, seed={spec.seed})"))
    print_msg(f"sha256 {checksum}")
    return 0


if __name__ == "__main__":
    sys.exit(run())
