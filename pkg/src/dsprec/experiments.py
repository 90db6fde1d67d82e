"""Single runs and ε/η sweeps, with distances to the reference interpolators.

Sweep points run concurrently on a thread pool; rows come back in grid order
and are written by the caller, so outputs are byte-identical across runs.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any

UTC = timezone.utc

import numpy as np

from .config import REFERENCE_ETA, VERSION, ExperimentConfig
from .loss import SeparableLoss, loss_value
from .optimizer import RunConfig, Trajectory, dspgd_run, gd_run
from .precond import Preconditioner
from .problem import ProblemInstance
from .reference import NormKind, ReferenceSolution, reference_solution
from .utils.exceptions import DivergenceError
from .utils.io import instance_checksum
from .utils.log import get_logger

logger = get_logger("experiments")

# Interpolation residual a row's limit must reach to count as converged
ROW_RESIDUAL_TOL = 1e-7

_DIST_COLUMNS = {NormKind.L1: "dist_l1", NormKind.L2: "dist_l2", NormKind.LINF: "dist_linf"}


@dataclass
class PointResult:
    """Outcome of one run: CSV fields plus the limit itself."""

    row: dict[str, Any]
    final_w: np.ndarray | None = None
    summary: dict[str, Any] = field(default_factory=dict)


@dataclass
class SweepResult:
    parameter: str
    points: list[PointResult]
    references: dict[NormKind, ReferenceSolution]

    @property
    def rows(self) -> list[dict[str, Any]]:
        return [pt.row for pt in self.points]


def compute_references(p: ProblemInstance, kinds: Sequence[NormKind]) -> dict[NormKind, ReferenceSolution]:
    return {kind: reference_solution(p, kind) for kind in kinds}


def _distances(w: np.ndarray, references: dict[NormKind, ReferenceSolution]) -> dict[str, float]:
    return {_DIST_COLUMNS[k]: float(np.linalg.norm(w - ref.w_star)) for k, ref in references.items()}


def _safe_run(run: Callable[[], Trajectory], label: str) -> Trajectory | None:
    try:
        return run()
    except DivergenceError as e:
        logger.warning("%s: %s", label, e)
        return None


def _row(
    param: str,
    value: float,
    p: ProblemInstance,
    loss: SeparableLoss,
    traj: Trajectory | None,
    references: dict[NormKind, ReferenceSolution],
    gd_w: np.ndarray | None,
) -> PointResult:
    if traj is None:
        return PointResult(
            row={"param": param, "value": value, "converged": False},
            summary={"diverged": True},
        )
    w = traj.final_w
    residual = float(np.linalg.norm(p.x @ w - p.y))
    converged = traj.converged and residual <= ROW_RESIDUAL_TOL
    if not converged:
        logger.warning("%s=%g did not converge (residual %.3e)", param, value, residual)
    row: dict[str, Any] = {
        "param": param,
        "value": value,
        "iters": traj.iters_used,
        "final_loss": loss_value(p, loss, w),
        "converged": converged,
        **_distances(w, references),
    }
    if gd_w is not None:
        row["dist_gd"] = float(np.linalg.norm(w - gd_w))
    summary = {
        "method": traj.method,
        "eta": traj.eta,
        "iters": traj.iters_used,
        "interp_residual": residual,
        "converged": converged,
    }
    return PointResult(row=row, final_w=w, summary=summary)


def _map_points(jobs: int, fn: Callable[[float], PointResult], grid: Sequence[float]) -> list[PointResult]:
    if jobs <= 1 or len(grid) <= 1:
        return [fn(v) for v in grid]
    with ThreadPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, grid))


def sweep_eps(config: ExperimentConfig, p: ProblemInstance | None = None) -> SweepResult:
    """One preconditioned run per ε at the configured η, against a shared GD limit."""
    p = p or config.problem.instance()
    loss = config.loss.build()
    cfg = config.run
    references = compute_references(p, config.norm_references)
    gd_w = None
    if config.wants_gd:
        gd = _safe_run(lambda: gd_run(p, loss, cfg), "gd baseline")
        gd_w = gd.final_w if gd is not None and gd.converged else None

    def point(eps: float) -> PointResult:
        precond = config.preconditioner.build(eps)
        traj = _safe_run(lambda: dspgd_run(p, loss, precond, cfg), f"eps={eps:g}")
        return _row("eps", eps, p, loss, traj, references, gd_w)

    grid = config.sweep.grid("eps")
    points = _map_points(config.jobs, point, grid)
    return SweepResult(parameter="eps", points=points, references=references)


def sweep_eta(config: ExperimentConfig, p: ProblemInstance | None = None) -> SweepResult:
    """One run per η at fixed ε; distances to W_ref (the η = 0.005 limit) and to GD at the same η."""
    p = p or config.problem.instance()
    loss = config.loss.build()
    precond = config.preconditioner.build()
    references = compute_references(p, config.norm_references)

    ref_traj = dspgd_run(p, loss, precond, config.run.with_eta(REFERENCE_ETA))
    w_ref = ref_traj.final_w
    ref_norm = float(np.linalg.norm(w_ref))
    if not ref_traj.converged:
        logger.warning("reference run at eta=%g did not converge", REFERENCE_ETA)

    def point(eta: float) -> PointResult:
        cfg = config.run.with_eta(eta)
        if eta == REFERENCE_ETA:
            traj: Trajectory | None = ref_traj
        else:
            traj = _safe_run(lambda: dspgd_run(p, loss, precond, cfg), f"eta={eta:g}")
        gd_w = None
        if config.wants_gd:
            gd = _safe_run(lambda: gd_run(p, loss, cfg), f"gd eta={eta:g}")
            gd_w = gd.final_w if gd is not None and gd.converged else None
        result = _row("eta", eta, p, loss, traj, references, gd_w)
        if result.final_w is not None:
            result.row["dist_ref"] = float(np.linalg.norm(result.final_w - w_ref))
            result.row["ref_norm"] = ref_norm
        return result

    grid = config.sweep.grid("eta")
    points = _map_points(config.jobs, point, grid)
    return SweepResult(parameter="eta", points=points, references=references)


@dataclass
class SingleRun:
    traj: Trajectory
    gd: Trajectory | None
    references: dict[NormKind, ReferenceSolution]
    point: PointResult


def run_single(
    config: ExperimentConfig,
    p: ProblemInstance | None = None,
    precond: Preconditioner | None = None,
    cfg: RunConfig | None = None,
) -> SingleRun:
    """One preconditioned run, the GD baseline when requested, and reference distances."""
    p = p or config.problem.instance()
    loss = config.loss.build()
    precond = precond or config.preconditioner.build()
    cfg = cfg or config.run
    references = compute_references(p, config.norm_references)
    traj = dspgd_run(p, loss, precond, cfg)
    gd = gd_run(p, loss, cfg) if config.wants_gd else None
    gd_w = gd.final_w if gd is not None and gd.converged else None
    point = _row("eta", cfg.eta, p, loss, traj, references, gd_w)
    return SingleRun(traj=traj, gd=gd, references=references, point=point)


def build_manifest(
    config: ExperimentConfig,
    p: ProblemInstance,
    command: str,
    runs: Sequence[dict[str, Any]] = (),
    checks: Sequence[dict[str, Any]] = (),
    extra: dict[str, Any] | None = None,
) -> dict[str, Any]:
    """Config echo, instance checksum, per-run summaries and check results.

    Only ``created`` changes between identical invocations.
    """
    manifest: dict[str, Any] = {
        "tool": "dsprec",
        "version": VERSION,
        "command": command,
        "config": config.echo(),
        "instance_sha256": instance_checksum(p),
        "runs": list(runs),
        "checks": list(checks),
        "created": datetime.now(UTC).isoformat(timespec="seconds"),
    }
    if extra:
        manifest.update(extra)
    return manifest
