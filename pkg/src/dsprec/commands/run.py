"""dsprec run command implementation.

Runs the preconditioned iteration once on the configured instance and
reports where it converged.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np
from rich.table import Table

from ..experiments import SingleRun, build_manifest, run_single
from ..precond import PRECONDITIONERS
from ..utils.console import check_style, console, green, print_msg, yellow
from ..utils.io import save_matrix, write_manifest
from ..verify import ProblemConstants, optimal_eta
from .common import add_common_arguments, load_config


def create_parser() -> argparse.ArgumentParser:
    """Create argument parser for dsprec run."""
    parser = argparse.ArgumentParser(
        prog="dsprec run",
        description="Run dual space preconditioned gradient descent once",
    )
    parser.add_argument("--eta", type=float, default=None, help="Step size")
    parser.add_argument(
        "-p",
        "--precond",
        choices=PRECONDITIONERS,
        default=None,
        help="Preconditioner family",
    )
    parser.add_argument("--eps", type=float, default=None, help="Preconditioner eps")
    add_common_arguments(parser)
    return parser


def print_summary(result: SingleRun) -> None:
    """Print iterations, losses and reference distances as a table.

    Args:
        result: Outcome of the run
    """
    table = Table(show_header=True, header_style="bold", box=None)
    table.add_column("METHOD", no_wrap=True)
    table.add_column("ITERS", justify="right")
    table.add_column("FINAL LOSS", justify="right")
    table.add_column("RESIDUAL", justify="right")
    for kind in result.references:
        table.add_column(f"DIST {kind.value}", justify="right")

    for traj in (result.traj, result.gd):
        if traj is None:
            continue
        dists = [f"{np.linalg.norm(traj.final_w - ref.w_star):.3e}" for ref in result.references.values()]
        style = check_style(traj.converged)
        table.add_row(
            traj.method,
            str(traj.iters_used),
            f"{traj.loss_series[-1]:.3e}",
            f"{traj.interp_residual:.3e}",
            *dists,
            style=style,
        )
    console.print(table)


def run(args: list[str] | None = None) -> int:
    """Run the dsprec run command.

    Args:
        args: Command line arguments (uses sys.argv if None)

    Returns:
        Exit code
    """
    parser = create_parser()
    parsed = parser.parse_args(args)
    config = load_config(parsed)

    if parsed.precond is not None:
        config.preconditioner.name = parsed.precond
    if parsed.eps is not None:
        config.preconditioner.eps = parsed.eps
    if parsed.eta is not None:
        config.run = config.run.with_eta(parsed.eta)
    config.validate()

    p = config.problem.instance()
    precond = config.preconditioner.build()
    loss = config.loss.build()
    bound = precond.eta_max(p.n, p.spectra)
    print_msg(f"{precond.label}: eta={config.run.eta:g}, admissible eta <= {bound:.6g}")
    if precond.isotropic:
        step = optimal_eta(ProblemConstants.build(p, loss, precond))
        print_msg(f"envelope-optimal eta {step.eta:.6g} (contraction {step.contraction:.6g})")

    result = run_single(config, p, precond)
    print_summary(result)

    out = config.output_dir
    save_matrix(out / "run_w.txt", result.traj.final_w)
    runs = [result.point.summary | {"method": result.traj.method}]
    if result.gd is not None:
        runs.append({"method": result.gd.method, "iters": result.gd.iters_used, "converged": result.gd.converged})
    manifest = build_manifest(
        config,
        p,
        command="run",
        runs=runs,
        extra={"distances": {k: v for k, v in result.point.row.items() if k.startswith("dist_")}},
    )
    write_manifest(out / "run.json", manifest)

    if not result.point.row["converged"]:
        print_msg(yellow(f"{result.traj.method} did not converge in {result.traj.iters_used} iterations"))
        return 1
    print_msg(green(f"Wrote {out / 'run.json'}"))
    return 0


if __name__ == "__main__":
    sys.exit(run())
