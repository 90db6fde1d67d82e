"""Checkers for the rate envelope, the optimal step, the proximity bounds and the supporting inequalities.

Limits W_∞ and W_GD,∞ are taken as the final iterates of converged runs.
Trajectory-based checks drop the last few recorded steps, where distances
reach floating-point noise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bregman import Anchor, adjusted_bregman_div, bregman_div
from .loss import SeparableLoss, loss_gradient, loss_value, min_loss
from .optimizer import Trajectory
from .precond import Preconditioner
from .problem import ProblemInstance, interpolation_residual
from .utils.exceptions import ConfigError, NotConvergedError, PreconditionError
from .utils.log import get_logger

logger = get_logger("verify")

REL_TOL = 1e-9
SKIP_TAIL = 5
ALPHA_SAFETY = 0.99


@dataclass(frozen=True)
class BoundReport:
    """Per-step margins (bound − observed) of one inequality.

    A step violates the bound when its margin is below −1e-9·(1 + |bound|).
    ``variants`` maps alternative constants of the same bound to their worst
    margin; they are reported only.
    """

    bound_name: str
    indices: np.ndarray
    bound: np.ndarray
    observed: np.ndarray
    variants: dict[str, float] = field(default_factory=dict)

    @property
    def per_step_margin(self) -> np.ndarray:
        return self.bound - self.observed

    @property
    def worst_margin(self) -> float:
        margin = self.per_step_margin
        return float(margin.min()) if margin.size else 0.0

    @property
    def _violations(self) -> np.ndarray:
        return np.flatnonzero(self.per_step_margin < -REL_TOL * (1.0 + np.abs(self.bound)))

    @property
    def holds(self) -> bool:
        return self._violations.size == 0

    @property
    def first_violation(self) -> tuple[int, float, float] | None:
        """(iteration, bound, observed) of the first violating step."""
        bad = self._violations
        if not bad.size:
            return None
        j = int(bad[0])
        return int(self.indices[j]), float(self.bound[j]), float(self.observed[j])

    def summary(self) -> str:
        if self.holds:
            return f"{self.bound_name}: holds (worst margin {self.worst_margin:.3e})"
        step, bound, observed = self.first_violation or (0, 0.0, 0.0)
        return f"{self.bound_name}: VIOLATED at step {step}: bound {bound:.6e} < observed {observed:.6e}"


def _report(
    name: str,
    indices: np.ndarray,
    bound: np.ndarray,
    observed: np.ndarray,
    variants: dict[str, float] | None = None,
) -> BoundReport:
    report = BoundReport(
        bound_name=name,
        indices=np.asarray(indices, dtype=np.int64),
        bound=np.asarray(bound, dtype=np.float64),
        observed=np.asarray(observed, dtype=np.float64),
        variants=variants or {},
    )
    if not report.holds:
        logger.debug(report.summary())
    return report


@dataclass(frozen=True)
class ProblemConstants:
    """Constants entering the rate and proximity bounds."""

    n: int
    sigma1: float
    sigman: float
    mu: float
    m_upper: float
    lipschitz_k: float
    m_k: float

    @property
    def smoothness(self) -> float:
        """Mσ₁(XXᵀ)/n, the gradient Lipschitz constant of 𝓛 on the span."""
        return self.m_upper * self.sigma1 / self.n

    @classmethod
    def build(
        cls,
        p: ProblemInstance,
        loss: SeparableLoss,
        precond: Preconditioner,
        radius: float | None = None,
    ) -> ProblemConstants:
        """Constants with m_K taken on the ball of the given radius (default: ‖∇𝓛(W₀)‖)."""
        if radius is None:
            radius = precond.radius(loss_gradient(p, loss, p.w0))
        return cls(
            n=p.n,
            sigma1=p.spectra.sigma1_gram,
            sigman=p.spectra.sigman_gram,
            mu=loss.mu,
            m_upper=loss.m_upper,
            lipschitz_k=precond.lipschitz,
            m_k=precond.strong_convexity_on_ball(radius),
        )


def trajectory_radius(
    traj: Trajectory, p: ProblemInstance, loss: SeparableLoss, precond: Preconditioner
) -> float:
    """Radius of the smallest ball, in the preconditioner's norm, holding every recorded gradient."""
    return max(precond.radius(loss_gradient(p, loss, w)) for w in traj.iterates)


def envelope_factor(c: ProblemConstants, eta: float) -> float:
    """Per-step contraction 1 + η²L_K²M²σ₁²/n² − η·m_K·μ·σₙ/n of the squared distance."""
    a = (c.lipschitz_k * c.m_upper * c.sigma1 / c.n) ** 2
    b = c.m_k * c.mu * c.sigman / c.n
    return 1.0 + a * eta * eta - b * eta


@dataclass(frozen=True)
class OptimalStep:
    """Minimizer of the envelope factor.

    ``eta_closed_form`` is n·(m_K/L_K²)·(μ/M²)·σₙ/σ₁², which is
    twice ``eta``. ``contraction`` is 1 − (m_K²/4L_K²)(μ²/M²)(σₙ²/σ₁²) and
    equals ``factor`` up to rounding.
    """

    eta: float
    eta_closed_form: float
    factor: float
    contraction: float


def optimal_eta(c: ProblemConstants) -> OptimalStep:
    for name in ("sigma1", "sigman", "mu", "m_upper", "lipschitz_k", "m_k"):
        if not getattr(c, name) > 0:
            raise ConfigError(f"constant {name} must be positive")
    a = (c.lipschitz_k * c.m_upper * c.sigma1 / c.n) ** 2
    b = c.m_k * c.mu * c.sigman / c.n
    eta = b / (2.0 * a)
    contraction = 1.0 - (c.m_k**2 / (4.0 * c.lipschitz_k**2)) * (c.mu**2 / c.m_upper**2) * (
        c.sigman**2 / c.sigma1**2
    )
    return OptimalStep(
        eta=eta,
        eta_closed_form=c.n * (c.m_k / c.lipschitz_k**2) * (c.mu / c.m_upper**2) * (c.sigman / c.sigma1**2),
        factor=envelope_factor(c, eta),
        contraction=contraction,
    )


def _require_converged(*trajs: Trajectory) -> None:
    for traj in trajs:
        if not traj.converged:
            raise NotConvergedError(f"{traj.method} did not converge in {traj.iters_used} iterations")


def _head(n: int, skip_tail: int) -> slice:
    return slice(0, max(n - skip_tail, 1))


def check_rate_envelope(
    traj: Trajectory,
    constants: ProblemConstants,
    precond: Preconditioner,
    skip_tail: int = SKIP_TAIL,
) -> BoundReport:
    """‖W_i − W_∞‖² against ‖W₀ − W_∞‖²·factor^i at every recorded i."""
    if not precond.isotropic:
        raise PreconditionError(f"the rate envelope needs an isotropic preconditioner, got {precond.label}")
    _require_converged(traj)
    factor = envelope_factor(constants, traj.eta)
    if factor >= 1.0:
        logger.warning("envelope factor %.6g >= 1 at eta=%g, the rate bound is vacuous", factor, traj.eta)
    keep = _head(len(traj.indices), skip_tail)
    idx = traj.indices[keep]
    dist = np.array([np.sum((w - traj.final_w) ** 2) for w in traj.iterates[keep]])
    bound = dist[0] * np.power(max(factor, 0.0), idx.astype(np.float64))
    return _report("rate_envelope", idx, bound, dist)


@dataclass(frozen=True)
class ProximityConfig:
    """α with K − α𝓛* convex on the span, the shared step size and the constants."""

    alpha: float
    eta: float
    constants: ProblemConstants

    def __post_init__(self) -> None:
        if not self.alpha > 0:
            raise ConfigError(f"alpha must be positive (got {self.alpha})")
        if not self.alpha * self.eta < 1.0:
            raise ConfigError(f"alpha*eta must be below 1 (got {self.alpha * self.eta:.6g})")
        if not self.example_rule_ok:
            logger.info(
                "alpha=%.6g is outside min{1/eta, 1/(n m_K)} = %.6g",
                self.alpha,
                min(1.0 / self.eta, 1.0 / (self.constants.n * self.constants.m_k)),
            )

    @property
    def example_rule_ok(self) -> bool:
        c = self.constants
        return self.alpha < min(1.0 / self.eta, 1.0 / (c.n * c.m_k))

    @property
    def dspgd_rate(self) -> float:
        return 1.0 - self.alpha * self.eta


def example_alpha(eta: float, constants: ProblemConstants) -> float:
    """0.99·min{1/η, 1/(n·m_K)}."""
    return ALPHA_SAFETY * min(1.0 / eta, 1.0 / (constants.n * constants.m_k))


def certified_alpha(constants: ProblemConstants) -> float:
    """0.99·m_K·μ·σₙ(XXᵀ)/n.

    With m_K taken over the ball of visited gradients, K − α𝓛* is convex
    there.
    """
    return ALPHA_SAFETY * constants.m_k * constants.sigman * constants.mu / constants.n


def _same_start(a: Trajectory, b: Trajectory) -> None:
    if not np.array_equal(a.w0, b.w0):
        raise PreconditionError("runs do not share the same W0")
    if a.eta != b.eta:
        raise PreconditionError(f"runs use different step sizes ({a.eta:g} vs {b.eta:g})")


def check_proximity_bounds(
    traj: Trajectory,
    traj_gd: Trajectory,
    p: ProblemInstance,
    loss: SeparableLoss,
    pcfg: ProximityConfig,
) -> tuple[BoundReport, BoundReport]:
    """Distance of the preconditioned limit to W₀ (bound A) and to the GD limit (bound B)."""
    _require_converged(traj, traj_gd)
    _same_start(traj, traj_gd)
    c = pcfg.constants
    eta = pcfg.eta
    s = c.smoothness
    q_gd = 1.0 - np.sqrt(1.0 - eta * c.mu * c.sigman / (2.0 * c.n))
    q_k = 1.0 - np.sqrt(pcfg.dspgd_rate)
    w0 = traj.w0
    gd_span = float(np.linalg.norm(w0 - traj_gd.final_w))
    initial_loss = loss_value(p, loss, w0)

    observed_a = float(np.linalg.norm(w0 - traj.final_w))
    bound_a = gd_span * (1.0 + np.sqrt(2.0) * s / q_gd + s / q_k)

    observed_b = float(np.linalg.norm(traj_gd.final_w - traj.final_w))
    root = np.sqrt(2.0 * s * initial_loss)
    bound_b = root * (1.0 / (eta * c.mu * c.sigman) + (c.lipschitz_k + 2.0) / q_k)
    variant_b = s * gd_span * (np.sqrt(2.0) / q_gd + 1.0 / q_k)

    zero = np.zeros(1, dtype=np.int64)
    return (
        _report("proximity_w0", zero, np.array([bound_a]), np.array([observed_a])),
        _report(
            "proximity_gd",
            zero,
            np.array([bound_b]),
            np.array([observed_b]),
            {"via_gd_distance": float(variant_b - observed_b)},
        ),
    )


def check_gradient_decay(
    traj: Trajectory,
    traj_gd: Trajectory,
    p: ProblemInstance,
    loss: SeparableLoss,
    pcfg: ProximityConfig,
    skip_tail: int = SKIP_TAIL,
) -> tuple[BoundReport, BoundReport]:
    """Geometric decay of ‖∇𝓛(W_i)‖ for the preconditioned run and of ‖∇𝓛(W_GD,i)‖² for GD.

    The GD branch checks the squared form with factor (1 − ημσₙ/(2n))^i, the
    weakest of the variants; the others are reported as variants.
    """
    _require_converged(traj, traj_gd)
    _same_start(traj, traj_gd)
    c = pcfg.constants
    eta = pcfg.eta
    s = c.smoothness
    gd_span = float(np.linalg.norm(traj.w0 - traj_gd.final_w))
    root = np.sqrt(2.0 * s * loss_value(p, loss, traj.w0))

    keep = _head(len(traj.indices), skip_tail)
    idx = traj.indices[keep].astype(np.float64)
    obs = traj.grad_norm_series[keep]
    decay = np.power(pcfg.dspgd_rate, idx / 2.0)
    dspgd = _report(
        "gradient_decay",
        traj.indices[keep],
        s * gd_span * decay,
        obs,
        {"descent": float(np.min(root * decay - obs))},
    )

    keep_gd = _head(len(traj_gd.indices), skip_tail)
    idx_gd = traj_gd.indices[keep_gd].astype(np.float64)
    obs_gd = traj_gd.grad_norm_series[keep_gd]
    rate = eta * c.mu * c.sigman / c.n
    squared_bound = 2.0 * (s * gd_span) ** 2 * np.power(1.0 - rate / 2.0, idx_gd)
    gd_variants = {
        "gd_rate": float(np.min(root * np.power(1.0 - rate, idx_gd) - obs_gd)),
        "sigma_x": float(np.min(root * np.power(1.0 - eta * c.mu * c.sigman, idx_gd) - obs_gd)),
    }
    gd = _report("gd_gradient_decay", traj_gd.indices[keep_gd], squared_bound, obs_gd**2, gd_variants)
    return dspgd, gd


def check_divergence_contraction(
    traj: Trajectory,
    p: ProblemInstance,
    loss: SeparableLoss,
    precond: Preconditioner,
    target_w: np.ndarray,
    alpha: float,
) -> BoundReport:
    """D̃(W, W_i) ≤ (1 − αη)·D̃(W, W_{i−1}) at every step for an interpolating target W.

    The hypothesis D_K(∇𝓛(W_i), ∇𝓛(W_{i−1})) − α·D̃(W_i, W_{i−1}) ≥ 0 is
    evaluated along the run and reported as the ``hypothesis`` variant.
    """
    if traj.record_every != 1:
        raise PreconditionError("contraction check needs every step recorded (record_every = 1)")
    target_w = p.check_weights(target_w)
    if interpolation_residual(p, target_w) > 1e-8 * (1.0 + float(np.linalg.norm(p.y))):
        raise PreconditionError("target W does not interpolate the data")
    rate = 1.0 - alpha * traj.eta
    div = np.array([adjusted_bregman_div(p, loss, target_w, w) for w in traj.iterates])
    hypothesis = [
        bregman_div(precond, loss_gradient(p, loss, cur), loss_gradient(p, loss, prev), Anchor.SECOND)
        - alpha * adjusted_bregman_div(p, loss, cur, prev)
        for prev, cur in zip(traj.iterates[:-1], traj.iterates[1:], strict=True)
    ]
    worst_hypothesis = float(min(hypothesis)) if hypothesis else 0.0
    if worst_hypothesis < -REL_TOL:
        logger.info("contraction hypothesis fails along the run (worst %.3e)", worst_hypothesis)
    return _report(
        "divergence_contraction",
        traj.indices[1:],
        rate * div[:-1],
        div[1:],
        {"hypothesis": worst_hypothesis},
    )


def _sample_weights(p: ProblemInstance, rng: np.random.Generator) -> np.ndarray:
    return p.w0 + rng.standard_normal((p.d, p.k))


def descent_lemma_check(p: ProblemInstance, loss: SeparableLoss, samples: int, seed: int) -> BoundReport:
    """‖∇𝓛(W)‖² ≤ 2(Mσ₁/n)(𝓛(W) − min 𝓛) at random W."""
    rng = np.random.default_rng(seed)
    floor = min_loss(p, loss)
    smooth = loss.m_upper * p.spectra.sigma1_gram / p.n
    bound, observed = [], []
    for _ in range(samples):
        w = _sample_weights(p, rng)
        bound.append(2.0 * smooth * (loss_value(p, loss, w) - floor))
        observed.append(float(np.sum(loss_gradient(p, loss, w) ** 2)))
    return _report("descent_lemma", np.arange(samples), np.array(bound), np.array(observed))


def hessian_sandwich_check(p: ProblemInstance, loss: SeparableLoss, samples: int, seed: int) -> BoundReport:
    """(μσₙ/n)‖Δ‖ ≤ ‖∇𝓛(W + Δ) − ∇𝓛(W)‖ ≤ (Mσ₁/n)‖Δ‖ for random Δ in the span.

    Margins are the smaller of the two gaps, normalized by ‖Δ‖.
    """
    rng = np.random.default_rng(seed)
    lower = loss.mu * p.spectra.sigman_gram / p.n
    upper = loss.m_upper * p.spectra.sigma1_gram / p.n
    ratios = []
    for _ in range(samples):
        w = _sample_weights(p, rng)
        delta = p.x.T @ rng.standard_normal((p.n, p.k))
        change = loss_gradient(p, loss, w + delta) - loss_gradient(p, loss, w)
        ratios.append(float(np.linalg.norm(change) / np.linalg.norm(delta)))
    r = np.array(ratios)
    margin_floor = np.minimum(r - lower, upper - r)
    return _report(
        "hessian_sandwich",
        np.arange(samples),
        margin_floor,
        np.zeros(samples),
        {"lower": float(np.min(r - lower)), "upper": float(np.min(upper - r))},
    )
