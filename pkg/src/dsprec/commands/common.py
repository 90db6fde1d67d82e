"""Flags and output handling shared by every subcommand."""

from __future__ import annotations

import argparse
from pathlib import Path

from ..config import VERSION, ExperimentConfig
from ..experiments import SweepResult, build_manifest
from ..problem import ProblemInstance
from ..utils.console import green, print_msg
from ..utils.io import CSV_COLUMNS, dumps_csv, write_manifest
from ..utils.log import get_logger, setup_logging
from ..utils.plotting import render_sweep_svg

logger = get_logger("commands")


def add_common_arguments(parser: argparse.ArgumentParser) -> None:
    """Add the flags every subcommand accepts."""
    parser.add_argument(
        "-c",
        "--config",
        type=Path,
        default=None,
        help="Experiment config file (TOML)",
    )
    parser.add_argument(
        "-o",
        "--out",
        type=Path,
        default=None,
        help="Output directory (default: results)",
    )
    parser.add_argument(
        "--seed",
        type=int,
        default=None,
        help="Seed for instance generation",
    )
    parser.add_argument(
        "--strict-eta",
        action="store_true",
        help="Refuse step sizes above the admissible bound instead of warning",
    )
    parser.add_argument(
        "-j",
        "--jobs",
        type=int,
        default=None,
        help="Worker threads for sweeps",
    )
    parser.add_argument(
        "-v",
        "--verbose",
        action="store_true",
        help="Show more verbosity",
    )
    parser.add_argument(
        "-V",
        "--version",
        action="version",
        version=f"dsprec: {VERSION}",
    )


def load_config(parsed: argparse.Namespace) -> ExperimentConfig:
    """Load the layered config and apply command-line flags on top.

    Args:
        parsed: Parsed arguments carrying the common flags

    Returns:
        Validated experiment configuration
    """
    config = ExperimentConfig.load(parsed.config)
    config.apply_overrides(
        out=parsed.out,
        seed=parsed.seed,
        strict_eta=parsed.strict_eta,
        jobs=parsed.jobs,
        verbose=parsed.verbose,
    )
    setup_logging(config.verbose)
    return config


def write_sweep_outputs(
    config: ExperimentConfig,
    p: ProblemInstance,
    result: SweepResult,
    name: str,
    title: str,
    columns: tuple[str, ...] = CSV_COLUMNS,
) -> Path:
    """Write ``<name>.csv``, ``<name>.svg`` and ``<name>.json`` under the output directory.

    The SVG is rendered from the CSV text, not from the in-memory rows.

    Returns:
        Path to the CSV file
    """
    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    csv_text = dumps_csv(result.rows, columns)
    csv_path = out / f"{name}.csv"
    csv_path.write_text(csv_text)
    (out / f"{name}.svg").write_text(render_sweep_svg(csv_text, title))

    manifest = build_manifest(
        config,
        p,
        command=name.replace("_", "-"),
        runs=[pt.summary | {k: v for k, v in pt.row.items() if k != "param"} for pt in result.points],
        extra={"references": {k.value: ref.objective for k, ref in result.references.items()}},
    )
    write_manifest(out / f"{name}.json", manifest)

    failed = sum(1 for row in result.rows if not row.get("converged"))
    if failed:
        logger.warning("%d of %d sweep points did not converge", failed, len(result.rows))
    print_msg(green(f"Wrote {csv_path}"))
    return csv_path
