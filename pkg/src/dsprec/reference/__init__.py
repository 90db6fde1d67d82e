"""Interpolating reference solutions: min ‖W − W₀‖_p subject to XW = Y.

ℓ₂ uses the closed-form KKT solution through a Cholesky factorization of XXᵀ.
ℓ₁ and ℓ∞ are reformulated as standard-form linear programs.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg

from ..problem import ProblemInstance
from ..utils.exceptions import IllConditionedError, UnsupportedError
from ..utils.log import get_logger
from .lp import LinearProgram, LPResult, lp_solve, vertex_enumeration_oracle

logger = get_logger("reference")

COND_LIMIT = 1e12


class NormKind(str, Enum):
    L1 = "L1"
    L2 = "L2"
    LINF = "Linf"

    @classmethod
    def parse(cls, text: str) -> NormKind:
        for kind in cls:
            if kind.value.lower() == text.strip().lower():
                return kind
        raise UnsupportedError(f"unknown reference norm {text!r}, expected L1, L2 or Linf")


@dataclass(frozen=True)
class ReferenceSolution:
    """Interpolator closest to W₀ in one norm.

    ``certificate`` is the KKT multiplier Λ (n×k) for ℓ₂ and the equality
    duals (n×k, column by column) for the LP norms.
    """

    w_star: np.ndarray
    p_norm: NormKind
    objective: float
    certificate: np.ndarray
    basis: tuple[tuple[int, ...], ...] | None = None


def matrix_norm(delta: np.ndarray, p_norm: NormKind) -> float:
    """Entrywise norm of a weight difference: ℓ₁ sum, Frobenius or max."""
    match p_norm:
        case NormKind.L1:
            return float(np.abs(delta).sum())
        case NormKind.L2:
            return float(np.linalg.norm(delta))
        case NormKind.LINF:
            return float(np.abs(delta).max(initial=0.0))


def min_l2_solution(p: ProblemInstance) -> ReferenceSolution:
    """W* = W₀ − XᵀΛ with Λ = (XXᵀ)⁻¹(XW₀ − Y), never forming the inverse."""
    cond = p.spectra.condition
    if cond > COND_LIMIT:
        raise IllConditionedError(f"gram condition number {cond:.3e} exceeds {COND_LIMIT:g}")
    factor = scipy.linalg.cho_factor(p.gram)
    lam = scipy.linalg.cho_solve(factor, p.x @ p.w0 - p.y)
    w_star = p.w0 - p.x.T @ lam
    return ReferenceSolution(
        w_star=w_star,
        p_norm=NormKind.L2,
        objective=matrix_norm(w_star - p.w0, NormKind.L2),
        certificate=lam,
    )


def _l1_program(x: np.ndarray, rhs: np.ndarray) -> LinearProgram:
    # w − w₀ = u − v with u, v ≥ 0
    d = x.shape[1]
    return LinearProgram(c=np.ones(2 * d), a_eq=np.hstack([x, -x]), b_eq=rhs)


def _linf_program(x: np.ndarray, rhs: np.ndarray) -> LinearProgram:
    # variables [u, v, t, s1, s2]: X(u − v) = rhs, u − v − t + s1 = 0, v − u − t + s2 = 0
    n, d = x.shape
    eye = np.eye(d)
    ones = np.ones((d, 1))
    zeros = np.zeros((d, d))
    top = np.hstack([x, -x, np.zeros((n, 1)), np.zeros((n, d)), np.zeros((n, d))])
    upper = np.hstack([eye, -eye, -ones, eye, zeros])
    lower = np.hstack([-eye, eye, -ones, zeros, eye])
    cost = np.zeros(4 * d + 1)
    cost[2 * d] = 1.0
    return LinearProgram(
        c=cost,
        a_eq=np.vstack([top, upper, lower]),
        b_eq=np.concatenate([rhs, np.zeros(2 * d)]),
    )


def _solve_column(x: np.ndarray, rhs: np.ndarray, p_norm: NormKind) -> tuple[np.ndarray, LPResult]:
    d = x.shape[1]
    lp = _l1_program(x, rhs) if p_norm is NormKind.L1 else _linf_program(x, rhs)
    result = lp_solve(lp)
    return result.x[:d] - result.x[d : 2 * d], result


def min_lp_solution(p: ProblemInstance, p_norm: NormKind) -> ReferenceSolution:
    """Min-ℓ₁ or min-ℓ∞ interpolator via the simplex solver.

    ℓ₁ separates over the columns of W, so k > 1 is solved column by column;
    ℓ∞ is only supported for k = 1.
    """
    if p_norm is NormKind.L2:
        raise UnsupportedError("use min_l2_solution for the L2 reference")
    if p_norm is NormKind.LINF and p.k > 1:
        raise UnsupportedError("the Linf reference is only defined for k = 1")

    residual = p.y - p.x @ p.w0
    deltas, duals, bases = [], [], []
    for j in range(p.k):
        delta, result = _solve_column(p.x, residual[:, j], p_norm)
        deltas.append(delta)
        duals.append(result.duals[: p.n])
        bases.append(result.basis)
    w_star = p.w0 + np.column_stack(deltas)
    logger.debug("%s reference solved (%d columns)", p_norm.value, p.k)
    return ReferenceSolution(
        w_star=w_star,
        p_norm=p_norm,
        objective=matrix_norm(w_star - p.w0, p_norm),
        certificate=np.column_stack(duals),
        basis=tuple(bases),
    )


def reference_solution(p: ProblemInstance, p_norm: NormKind) -> ReferenceSolution:
    if p_norm is NormKind.L2:
        return min_l2_solution(p)
    return min_lp_solution(p, p_norm)


__all__ = [
    "COND_LIMIT",
    "LPResult",
    "LinearProgram",
    "NormKind",
    "ReferenceSolution",
    "lp_solve",
    "matrix_norm",
    "min_l2_solution",
    "min_lp_solution",
    "reference_solution",
    "vertex_enumeration_oracle",
]
