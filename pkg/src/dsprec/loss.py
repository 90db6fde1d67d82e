"""Separable convex losses, their gradients and the Fenchel dual on the span.

All losses use the 1/n normalization: 𝓛(W) = (1/n)·Σ ℓ(x_iᵀW⁽ʲ⁾ − Y_ij).
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg

from .problem import ProblemInstance
from .reference import min_l2_solution
from .utils.exceptions import ConfigError, DualSolveError
from .utils.log import get_logger

logger = get_logger("loss")

EntryFn = Callable[[np.ndarray], np.ndarray]

DUAL_MAX_ITERS = 1_000_000
DUAL_TOL = 1e-10


class LossKind(str, Enum):
    SQUARED = "squared"
    CUSTOM = "custom"


def _squared_value(z: np.ndarray) -> np.ndarray:
    return 0.5 * z * z


def _squared_deriv(z: np.ndarray) -> np.ndarray:
    return z


def _log_cosh_value(z: np.ndarray) -> np.ndarray:
    # log cosh z = |z| + log1p(exp(-2|z|)) - log 2, stable for large |z|
    a = np.abs(z)
    return 0.5 * z * z + a + np.log1p(np.exp(-2.0 * a)) - np.log(2.0)


def _log_cosh_deriv(z: np.ndarray) -> np.ndarray:
    return z + np.tanh(z)


@dataclass(frozen=True)
class SeparableLoss:
    """Entrywise convex loss with strong convexity μ and gradient Lipschitz M.

    ``mu`` is used as a strong-convexity constant even though the assumption
    it comes from is worded as strict convexity.
    """

    kind: LossKind
    entry_value: EntryFn
    entry_deriv: EntryFn
    mu: float
    m_upper: float
    name: str = "squared"

    def __post_init__(self) -> None:
        if not (self.mu > 0 and self.m_upper >= self.mu):
            raise ValueError(f"need 0 < mu <= M (got mu={self.mu}, M={self.m_upper})")

    @classmethod
    def squared(cls) -> SeparableLoss:
        return cls(LossKind.SQUARED, _squared_value, _squared_deriv, 1.0, 1.0, "squared")

    @classmethod
    def custom(
        cls, entry_value: EntryFn, entry_deriv: EntryFn, mu: float, m_upper: float, name: str = "custom"
    ) -> SeparableLoss:
        """Wrap a user-supplied entrywise loss; its dual is solved numerically."""
        return cls(LossKind.CUSTOM, entry_value, entry_deriv, mu, m_upper, name)

    @classmethod
    def log_cosh(cls) -> SeparableLoss:
        """ℓ(z) = z²/2 + log cosh z, with μ = 1 and M = 2."""
        return cls.custom(_log_cosh_value, _log_cosh_deriv, 1.0, 2.0, "log_cosh")

    @classmethod
    def from_name(cls, name: str) -> SeparableLoss:
        match name:
            case "squared":
                return cls.squared()
            case "log_cosh":
                return cls.log_cosh()
            case _:
                raise ConfigError(f"unknown loss kind: {name!r}")


@dataclass(frozen=True)
class SpanElement:
    """A matrix XᵀΛ of the span subspace, stored through its multiplier Λ (n×k)."""

    lam: np.ndarray

    def matrix(self, p: ProblemInstance) -> np.ndarray:
        return p.x.T @ self.lam

    @classmethod
    def from_matrix(cls, p: ProblemInstance, g: np.ndarray) -> SpanElement:
        """Recover Λ from G = XᵀΛ by solving XXᵀΛ = XG."""
        factor = scipy.linalg.cho_factor(p.gram)
        return cls(scipy.linalg.cho_solve(factor, p.x @ g))


def _residual(p: ProblemInstance, w: np.ndarray) -> np.ndarray:
    w = p.check_weights(w)
    return p.x @ w - p.y


def loss_value(p: ProblemInstance, loss: SeparableLoss, w: np.ndarray) -> float:
    return float(np.sum(loss.entry_value(_residual(p, w))) / p.n)


def residual_coefficients(p: ProblemInstance, loss: SeparableLoss, w: np.ndarray) -> np.ndarray:
    """Λ with Λ_ij = ℓ′(x_iᵀW⁽ʲ⁾ − Y_ij)/n, so that ∇𝓛(W) = XᵀΛ."""
    return loss.entry_deriv(_residual(p, w)) / p.n


def loss_gradient(p: ProblemInstance, loss: SeparableLoss, w: np.ndarray) -> np.ndarray:
    return p.x.T @ residual_coefficients(p, loss, w)


def dual_value(p: ProblemInstance, loss: SeparableLoss, g: SpanElement) -> float:
    """Fenchel dual 𝓛*(XᵀΛ).

    Closed form Tr(YᵀΛ) + (n/2)‖Λ‖² for the squared loss; otherwise a
    gradient ascent on W₀ + 𝓢 with step n/(Mσ₁) until the ascent direction
    XᵀΛ − ∇𝓛(W) falls below the tolerance.
    """
    lam = np.asarray(g.lam, dtype=np.float64)
    if loss.kind is LossKind.SQUARED:
        return float(np.sum(p.y * lam) + 0.5 * p.n * np.sum(lam * lam))
    return _numeric_dual(p, loss, lam)


def _numeric_dual(p: ProblemInstance, loss: SeparableLoss, lam: np.ndarray) -> float:
    target = p.x.T @ lam
    step = p.n / (loss.m_upper * p.spectra.sigma1_gram)
    w = np.array(p.w0, copy=True)
    for it in range(DUAL_MAX_ITERS):
        ascent = target - loss_gradient(p, loss, w)
        if np.linalg.norm(ascent) <= DUAL_TOL:
            logger.debug("dual inner solve converged after %d iterations", it)
            break
        w = w + step * ascent
    else:
        raise DualSolveError(
            f"dual inner solve did not reach {DUAL_TOL:g} in {DUAL_MAX_ITERS} iterations"
        )
    return float(np.sum(target * w) - loss_value(p, loss, w))


@dataclass(frozen=True)
class LossFunctional:
    """𝓛 on weight space, exposing ``value`` and ``grad`` like a preconditioner."""

    p: ProblemInstance
    loss: SeparableLoss

    def value(self, w: np.ndarray) -> float:
        return loss_value(self.p, self.loss, w)

    def grad(self, w: np.ndarray) -> np.ndarray:
        return loss_gradient(self.p, self.loss, w)


def min_loss(p: ProblemInstance, loss: SeparableLoss) -> float:
    """𝓛 at the min-ℓ₂ interpolator: zero whenever ℓ(0) = 0.

    Raises IllConditionedError when the gram is too ill conditioned to solve for it.
    """
    return loss_value(p, loss, min_l2_solution(p).w_star)
