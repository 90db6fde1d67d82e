"""dsprec refsolve command implementation.

Computes the interpolators closest to W0 in the requested norms and writes
each solution, its dual certificate and its objective.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np
from rich.table import Table

from ..experiments import build_manifest, compute_references
from ..problem import interpolation_residual
from ..reference import NormKind
from ..utils.console import console, green, print_msg
from ..utils.io import save_matrix, write_manifest
from .common import add_common_arguments, load_config


def create_parser() -> argparse.ArgumentParser:
    """Create argument parser for dsprec refsolve."""
    parser = argparse.ArgumentParser(
        prog="dsprec refsolve",
        description="Compute min-norm interpolating reference solutions",
    )
    parser.add_argument(
        "--norms",
        nargs="+",
        default=None,
        metavar="NORM",
        help="Norms to solve for: L1, L2, Linf (default: the configured references)",
    )
    add_common_arguments(parser)
    return parser


def run(args: list[str] | None = None) -> int:
    """Run the dsprec refsolve command.

    Args:
        args: Command line arguments (uses sys.argv if None)

    Returns:
        Exit code
    """
    parser = create_parser()
    parsed = parser.parse_args(args)
    config = load_config(parsed)

    kinds = [NormKind.parse(n) for n in parsed.norms] if parsed.norms else config.norm_references
    p = config.problem.instance()
    references = compute_references(p, kinds)

    out = config.output_dir
    table = Table(show_header=True, header_style="bold", box=None)
    table.add_column("NORM", no_wrap=True)
    table.add_column("OBJECTIVE", justify="right")
    table.add_column("RESIDUAL", justify="right")
    table.add_column("FILE")

    summaries = []
    for kind, ref in references.items():
        stem = f"ref_{kind.value.lower()}"
        path = save_matrix(out / f"{stem}_w.txt", ref.w_star)
        save_matrix(out / f"{stem}_certificate.txt", ref.certificate)
        residual = interpolation_residual(p, ref.w_star)
        summary = {"norm": kind.value, "objective": ref.objective, "interp_residual": residual}
        if kind is NormKind.L2:
            # Stationarity: W* − W₀ + XᵀΛ = 0
            summary["kkt_residual"] = float(np.linalg.norm(ref.w_star - p.w0 + p.x.T @ ref.certificate))
        summaries.append(summary)
        table.add_row(kind.value, f"{ref.objective:.10g}", f"{residual:.3e}", str(path))
    console.print(table, highlight=False)

    manifest = build_manifest(config, p, command="refsolve", runs=summaries)
    write_manifest(out / "refsolve.json", manifest)
    print_msg(green(f"Wrote {len(references)} reference solutions to {out}"))
    return 0


if __name__ == "__main__":
    sys.exit(run())
