"""Bregman and adjusted Bregman divergences, and residual checks of the identities they satisfy.

Every identity check evaluates its two sides term by term from scratch, with
no shared intermediate values.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Protocol

import numpy as np

from .loss import (
    SeparableLoss,
    SpanElement,
    dual_value,
    loss_gradient,
    loss_value,
    residual_coefficients,
)
from .problem import ProblemInstance
from .utils.exceptions import PreconditionError, ShapeError

if TYPE_CHECKING:
    from .optimizer import Trajectory
    from .precond import Preconditioner

# Exact-step tolerance for the precondition of the per-step identity
STEP_TOL = 1e-12


class Functional(Protocol):
    def value(self, z: np.ndarray, /) -> float: ...

    def grad(self, z: np.ndarray, /) -> np.ndarray: ...


class Anchor(str, Enum):
    """Which argument the gradient of a Bregman divergence is taken at."""

    FIRST = "first"
    SECOND = "second"


@dataclass(frozen=True)
class IdentityReport:
    lhs: float
    rhs: float
    abs_residual: float
    rel_residual: float
    anchor: Anchor | None = None

    @classmethod
    def compare(cls, lhs: float, rhs: float, anchor: Anchor | None = None) -> IdentityReport:
        abs_res = abs(lhs - rhs)
        return cls(
            lhs=lhs,
            rhs=rhs,
            abs_residual=abs_res,
            rel_residual=abs_res / (1.0 + max(abs(lhs), abs(rhs))),
            anchor=anchor,
        )

    def within(self, tol: float) -> bool:
        return self.rel_residual <= tol


def bregman_div(f: Functional, a: np.ndarray, b: np.ndarray, anchor: Anchor = Anchor.FIRST) -> float:
    """D_f(a, b) = f(a) − f(b) − ⟨∇f(·), a − b⟩.

    With the default ``Anchor.FIRST`` the gradient is taken at ``a``, which
    makes the value nonpositive for convex f. ``Anchor.SECOND`` takes it at
    ``b`` and gives the usual nonnegative divergence.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch: {a.shape} vs {b.shape}")
    at = a if anchor is Anchor.FIRST else b
    return float(f.value(a) - f.value(b) - np.sum(f.grad(at) * (a - b)))


def _dual_at(p: ProblemInstance, loss: SeparableLoss, w: np.ndarray) -> float:
    return dual_value(p, loss, SpanElement(residual_coefficients(p, loss, w)))


def adjusted_bregman_div(p: ProblemInstance, loss: SeparableLoss, a: np.ndarray, b: np.ndarray) -> float:
    """D̃(a, b) = 𝓛*(∇𝓛(a)) − 𝓛*(∇𝓛(b)) − ⟨b, ∇𝓛(a) − ∇𝓛(b)⟩."""
    a = p.check_weights(a)
    b = p.check_weights(b)
    diff = loss_gradient(p, loss, a) - loss_gradient(p, loss, b)
    return _dual_at(p, loss, a) - _dual_at(p, loss, b) - float(np.sum(b * diff))


def three_point_residual(
    p: ProblemInstance, loss: SeparableLoss, a: np.ndarray, b: np.ndarray, c: np.ndarray
) -> IdentityReport:
    """D̃(C,A) + D̃(A,B) − D̃(C,B) against ⟨B − A, ∇𝓛(C) − ∇𝓛(A)⟩."""
    lhs = (
        adjusted_bregman_div(p, loss, c, a)
        + adjusted_bregman_div(p, loss, a, b)
        - adjusted_bregman_div(p, loss, c, b)
    )
    rhs = float(np.sum((b - a) * (loss_gradient(p, loss, c) - loss_gradient(p, loss, a))))
    return IdentityReport.compare(lhs, rhs)


def fenchel_young_residual(p: ProblemInstance, loss: SeparableLoss, b: np.ndarray) -> IdentityReport:
    """𝓛*(∇𝓛(B)) + 𝓛(B) against ⟨B, ∇𝓛(B)⟩."""
    lhs = _dual_at(p, loss, b) + loss_value(p, loss, b)
    rhs = float(np.sum(b * loss_gradient(p, loss, b)))
    return IdentityReport.compare(lhs, rhs)


def _step_terms(
    p: ProblemInstance,
    loss: SeparableLoss,
    precond: Preconditioner,
    w: np.ndarray,
    w_prev: np.ndarray,
    w_next: np.ndarray,
    eta: float,
    anchor: Anchor,
) -> float:
    """Right-hand side of the per-step identity for one choice of D_K anchor."""
    g = loss_gradient(p, loss, w)
    g_prev = loss_gradient(p, loss, w_prev)
    g_next = loss_gradient(p, loss, w_next)
    return (
        adjusted_bregman_div(p, loss, w, w_next)
        + eta * precond.value(g_next)
        - eta * precond.value(g)
        + adjusted_bregman_div(p, loss, w_next, w_prev)
        - eta * bregman_div(precond, g_next, g_prev, anchor)
        + eta * bregman_div(precond, g, g_prev, anchor)
    )


def fundamental_identity_residual(
    p: ProblemInstance,
    loss: SeparableLoss,
    precond: Preconditioner,
    w: np.ndarray,
    w_prev: np.ndarray,
    w_next: np.ndarray,
    eta: float,
) -> IdentityReport:
    """Residual of the one-step identity linking D̃(W, W_{i−1}) to D̃(W, W_i).

    Both anchors of D_K are evaluated; the report keeps the one with the
    smaller residual and records which it was. Ties go to ``Anchor.SECOND``.
    """
    w, w_prev, w_next = (p.check_weights(m) for m in (w, w_prev, w_next))
    expected = w_prev - eta * precond.grad(loss_gradient(p, loss, w_prev))
    drift = float(np.max(np.abs(w_next - expected))) if w_next.size else 0.0
    if drift > STEP_TOL * (1.0 + float(np.max(np.abs(w_prev)))):
        raise PreconditionError(f"w_next is not one step from w_prev (max deviation {drift:.3e})")

    lhs = adjusted_bregman_div(p, loss, w, w_prev)
    reports = [
        IdentityReport.compare(lhs, _step_terms(p, loss, precond, w, w_prev, w_next, eta, anchor), anchor)
        for anchor in (Anchor.SECOND, Anchor.FIRST)
    ]
    return min(reports, key=lambda r: r.rel_residual)


def telescoped_identity_residual(
    p: ProblemInstance,
    loss: SeparableLoss,
    precond: Preconditioner,
    traj: Trajectory,
    w: np.ndarray,
) -> IdentityReport:
    """Sum of the per-step identities over a run, against D̃(W, W₀) − D̃(W, W_t)."""
    if traj.record_every != 1:
        raise PreconditionError("telescoping needs every step recorded (record_every = 1)")
    w = p.check_weights(w)
    eta = traj.eta
    iterates = traj.iterates
    lhs = adjusted_bregman_div(p, loss, w, iterates[0]) - adjusted_bregman_div(p, loss, w, iterates[-1])
    g = loss_gradient(p, loss, w)
    k_at_grad = precond.value(g)
    rhs = 0.0
    for prev, cur in zip(iterates[:-1], iterates[1:], strict=True):
        g_prev = loss_gradient(p, loss, prev)
        g_cur = loss_gradient(p, loss, cur)
        rhs += (
            eta * precond.value(g_cur)
            - eta * k_at_grad
            + adjusted_bregman_div(p, loss, cur, prev)
            - eta * bregman_div(precond, g_cur, g_prev, Anchor.SECOND)
            + eta * bregman_div(precond, g, g_prev, Anchor.SECOND)
        )
    return IdentityReport.compare(lhs, rhs, Anchor.SECOND)


def convexity_gap(
    p: ProblemInstance,
    loss: SeparableLoss,
    precond: Preconditioner,
    a: np.ndarray,
    b: np.ndarray,
    eta: float,
) -> float:
    """D̃(a, b) − η·D_K(∇𝓛(a), ∇𝓛(b)); nonnegative while 𝓛* − ηK is convex on the span."""
    g_a = loss_gradient(p, loss, a)
    g_b = loss_gradient(p, loss, b)
    return adjusted_bregman_div(p, loss, a, b) - eta * bregman_div(precond, g_a, g_b, Anchor.SECOND)
