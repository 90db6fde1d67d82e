"""Dual space preconditioned gradient descent and the plain GD baseline.

The update is W_i = W_{i−1} − η·∇K(∇𝓛(W_{i−1})); with K = ½‖·‖² it is GD.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from .loss import SeparableLoss, loss_gradient, loss_value
from .precond import Preconditioner, make_quadratic
from .problem import ProblemInstance
from .utils.exceptions import (
    ConfigError,
    DivergenceError,
    NotConvergedError,
    PreconditionError,
    StepSizeError,
)
from .utils.log import get_logger

logger = get_logger("optimizer")

LOSS_EXPLOSION = 1e12
# Above this many weight entries only every 10th iterate is kept
DENSE_RECORD_LIMIT = 100_000


@dataclass(frozen=True)
class RunConfig:
    """Step size, stopping rule and recording cadence of one run."""

    eta: float = 0.005
    max_iters: int = 1_000_000
    tol_grad_k: float = 1e-10
    tol_interp: float = 1e-10
    record_every: int | None = None
    strict_eta: bool = False

    def __post_init__(self) -> None:
        if not self.eta > 0:
            raise ConfigError(f"eta must be positive (got {self.eta})")
        if self.max_iters < 1:
            raise ConfigError(f"max_iters must be at least 1 (got {self.max_iters})")
        if not (self.tol_grad_k > 0 and self.tol_interp > 0):
            raise ConfigError("stopping tolerances must be positive")
        if self.record_every is not None and self.record_every < 1:
            raise ConfigError(f"record_every must be positive (got {self.record_every})")

    def with_eta(self, eta: float) -> RunConfig:
        return RunConfig(
            eta=eta,
            max_iters=self.max_iters,
            tol_grad_k=self.tol_grad_k,
            tol_interp=self.tol_interp,
            record_every=self.record_every,
            strict_eta=self.strict_eta,
        )


def default_record_every(p: ProblemInstance) -> int:
    return 1 if p.n * p.d * p.k <= DENSE_RECORD_LIMIT else 10


@dataclass
class Trajectory:
    """Recorded iterates and per-iteration diagnostics of one run.

    ``indices`` holds the iteration number of each recorded iterate. The
    scalar series are recorded at the same iterations.
    """

    method: str
    eta: float
    record_every: int
    indices: np.ndarray
    iterates: np.ndarray
    loss_series: np.ndarray
    grad_norm_series: np.ndarray
    precond_grad_norm_series: np.ndarray
    k_value_series: np.ndarray
    final_w: np.ndarray
    converged: bool
    iters_used: int
    interp_residual: float = field(default=float("nan"))

    @property
    def w0(self) -> np.ndarray:
        return self.iterates[0]


def check_step(p: ProblemInstance, precond: Preconditioner, cfg: RunConfig) -> None:
    bound = precond.eta_max(p.n, p.spectra)
    if cfg.eta <= bound:
        return
    message = f"eta={cfg.eta:g} exceeds the admissible bound {bound:.6g} for {precond.label}"
    if cfg.strict_eta:
        raise StepSizeError(message)
    logger.warning(message)


def _iterate(
    p: ProblemInstance,
    loss: SeparableLoss,
    precond: Preconditioner,
    cfg: RunConfig,
    method: str,
) -> Trajectory:
    check_step(p, precond, cfg)
    every = cfg.record_every or default_record_every(p)
    step: Callable[[np.ndarray], np.ndarray] = precond.grad

    indices: list[int] = []
    iterates: list[np.ndarray] = []
    losses: list[float] = []
    grad_norms: list[float] = []
    step_norms: list[float] = []
    k_values: list[float] = []

    w = np.array(p.w0, dtype=np.float64, copy=True)
    converged = False
    residual = float("nan")
    i = 0
    while True:
        r = p.x @ w - p.y
        value = loss_value(p, loss, w)
        if not np.isfinite(value) or not np.all(np.isfinite(w)) or value > LOSS_EXPLOSION:
            raise DivergenceError(f"{method} diverged with eta={cfg.eta:g}", i)
        g = loss_gradient(p, loss, w)
        direction = step(g)
        residual = float(np.linalg.norm(r))
        direction_norm = float(np.linalg.norm(direction))
        done = direction_norm <= cfg.tol_grad_k and residual <= cfg.tol_interp
        last = done or i == cfg.max_iters

        if i % every == 0 or last:
            indices.append(i)
            iterates.append(w.copy())
            losses.append(value)
            grad_norms.append(float(np.linalg.norm(g)))
            step_norms.append(direction_norm)
            k_values.append(precond.value(g))

        if done:
            converged = True
            break
        if i == cfg.max_iters:
            break
        w = w - cfg.eta * direction
        i += 1

    if converged:
        logger.debug("%s converged after %d iterations (residual %.3e)", method, i, residual)
    else:
        logger.debug("%s stopped at max_iters=%d (residual %.3e)", method, i, residual)

    return Trajectory(
        method=method,
        eta=cfg.eta,
        record_every=every,
        indices=np.asarray(indices, dtype=np.int64),
        iterates=np.stack(iterates),
        loss_series=np.asarray(losses),
        grad_norm_series=np.asarray(grad_norms),
        precond_grad_norm_series=np.asarray(step_norms),
        k_value_series=np.asarray(k_values),
        final_w=w,
        converged=converged,
        iters_used=i,
        interp_residual=residual,
    )


def dspgd_run(
    p: ProblemInstance, loss: SeparableLoss, precond: Preconditioner, cfg: RunConfig
) -> Trajectory:
    """Run the preconditioned iteration from W₀ until both tolerances hold or max_iters."""
    return _iterate(p, loss, precond, cfg, f"dspgd[{precond.label}]")


def gd_run(p: ProblemInstance, loss: SeparableLoss, cfg: RunConfig) -> Trajectory:
    return _iterate(p, loss, make_quadratic(), cfg, "gd")


@dataclass(frozen=True)
class AuxiliarySeries:
    """Ŵ_i = W_{i−1} − η∇𝓛(W_{i−1}) along a preconditioned run."""

    w_hat: np.ndarray
    gap_series: np.ndarray
    gap_bound_series: np.ndarray

    @property
    def holds(self) -> bool:
        slack = 1e-12 * (1.0 + self.gap_bound_series)
        return bool(np.all(self.gap_series <= self.gap_bound_series + slack))


def _require_dense(traj: Trajectory) -> None:
    if traj.record_every != 1:
        raise PreconditionError(f"{traj.method}: needs every step recorded (record_every = 1)")


def auxiliary_series(
    traj: Trajectory, p: ProblemInstance, loss: SeparableLoss, precond: Preconditioner
) -> AuxiliarySeries:
    """Auxiliary GD-like iterates and the per-step gap ‖Ŵ_i − W_i‖ ≤ η(L_K + 1)‖∇𝓛(W_{i−1})‖."""
    _require_dense(traj)
    prev, cur = traj.iterates[:-1], traj.iterates[1:]
    grads = np.stack([loss_gradient(p, loss, w) for w in prev]) if len(prev) else prev
    w_hat = prev - traj.eta * grads
    flat = (len(cur), p.d * p.k)
    gaps = np.linalg.norm((w_hat - cur).reshape(flat), axis=1)
    bounds = traj.eta * (precond.lipschitz + 1.0) * np.linalg.norm(grads.reshape(flat), axis=1)
    return AuxiliarySeries(w_hat=w_hat, gap_series=gaps, gap_bound_series=bounds)


def fixed_point_check(traj: Trajectory, p: ProblemInstance) -> float:
    """‖X·W_∞ − Y‖_F for a converged run."""
    if not traj.converged:
        raise NotConvergedError(f"{traj.method} did not converge in {traj.iters_used} iterations")
    return float(np.linalg.norm(p.x @ traj.final_w - p.y))


def verify_steps(
    traj: Trajectory, p: ProblemInstance, loss: SeparableLoss, precond: Preconditioner
) -> float:
    """Largest entry of W_i − W_{i−1} + η∇K(∇𝓛(W_{i−1})) over recorded transitions."""
    _require_dense(traj)
    worst = 0.0
    for prev, cur in zip(traj.iterates[:-1], traj.iterates[1:], strict=True):
        step = cur - prev + traj.eta * precond.grad(loss_gradient(p, loss, prev))
        worst = max(worst, float(np.max(np.abs(step))))
    return worst
