"""Dense two-phase primal simplex with Bland's anti-cycling rule.

Solves standard-form programs min cᵀx s.t. Ax = b, x ≥ 0. Sized for the
reformulated reference problems (tens of variables), not for general use.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
import scipy.linalg

from ..utils.exceptions import (
    LPInfeasibleError,
    LPIterationLimitError,
    LPUnboundedError,
    ShapeError,
    UnsupportedError,
)
from ..utils.log import get_logger

logger = get_logger("reference.lp")

MAX_PIVOTS = 100_000
PIVOT_TOL = 1e-9
ORACLE_MAX_VARS = 10


@dataclass(frozen=True)
class LinearProgram:
    """min cᵀx subject to A x = b and x ≥ 0."""

    c: np.ndarray
    a_eq: np.ndarray
    b_eq: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.c, dtype=np.float64).ravel()
        a = np.asarray(self.a_eq, dtype=np.float64)
        b = np.asarray(self.b_eq, dtype=np.float64).ravel()
        if a.ndim != 2:
            a = a.reshape(0, c.size) if a.size == 0 else a
        if a.shape != (b.size, c.size):
            raise ShapeError(f"constraint matrix has shape {a.shape}, expected {(b.size, c.size)}")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "a_eq", a)
        object.__setattr__(self, "b_eq", b)

    @property
    def num_vars(self) -> int:
        return int(self.c.size)

    @property
    def num_rows(self) -> int:
        return int(self.b_eq.size)


@dataclass(frozen=True)
class LPResult:
    """Optimal vertex with its basis and the equality-constraint duals y (Aᵀy ≤ c)."""

    x: np.ndarray
    objective: float
    duals: np.ndarray
    basis: tuple[int, ...]
    pivots: int


class _Tableau:
    """Constraint rows B⁻¹[A | b] kept in canonical form for the current basis."""

    def __init__(self, rows: np.ndarray, basis: list[int], tol: float, max_pivots: int) -> None:
        self.rows = rows
        self.basis = basis
        self.tol = tol
        self.max_pivots = max_pivots
        self.pivots = 0

    def pivot(self, r: int, j: int) -> None:
        self.rows[r] /= self.rows[r, j]
        for i in range(self.rows.shape[0]):
            if i != r and self.rows[i, j] != 0.0:
                self.rows[i] -= self.rows[i, j] * self.rows[r]
        self.basis[r] = j
        self.pivots += 1
        if self.pivots > self.max_pivots:
            raise LPIterationLimitError(f"simplex exceeded {self.max_pivots} pivots")

    def optimize(self, cost: np.ndarray, columns: int) -> None:
        """Bland's rule: lowest-index improving column, lowest-index leaving variable on ties."""
        while True:
            body = self.rows[:, :columns]
            reduced = cost[:columns] - cost[self.basis] @ body
            entering = next((j for j in range(columns) if reduced[j] < -self.tol), None)
            if entering is None:
                return
            column = body[:, entering]
            best: tuple[float, int, int] | None = None
            for i in np.flatnonzero(column > self.tol):
                ratio = self.rows[i, -1] / column[i]
                key = (ratio, self.basis[i], int(i))
                if best is None or ratio < best[0] - self.tol or (
                    abs(ratio - best[0]) <= self.tol and self.basis[i] < best[1]
                ):
                    best = key
            if best is None:
                raise LPUnboundedError(f"objective unbounded along column {entering}")
            self.pivot(best[2], entering)


def lp_solve(lp: LinearProgram, max_pivots: int = MAX_PIVOTS, tol: float = PIVOT_TOL) -> LPResult:
    """Solve a standard-form program.

    Phase one minimizes the sum of artificial variables; artificials left in
    the basis at level zero are pivoted out, and rows where that is impossible
    are dropped as redundant before phase two.
    """
    m, nv = lp.num_rows, lp.num_vars
    sign = np.where(lp.b_eq < 0, -1.0, 1.0)
    a = lp.a_eq * sign[:, None]
    b = lp.b_eq * sign

    rows = np.zeros((m, nv + m + 1))
    rows[:, :nv] = a
    rows[:, nv : nv + m] = np.eye(m)
    rows[:, -1] = b
    tab = _Tableau(rows, list(range(nv, nv + m)), tol, max_pivots)

    phase1 = np.concatenate([np.zeros(nv), np.ones(m)])
    tab.optimize(phase1, nv + m)
    infeasibility = float(phase1[tab.basis] @ tab.rows[:, -1])
    if infeasibility > tol * (1.0 + float(np.abs(b).sum())):
        raise LPInfeasibleError(f"no feasible point (phase-one objective {infeasibility:.3e})")

    kept = list(range(m))
    for r in range(m - 1, -1, -1):
        if tab.basis[r] < nv:
            continue
        candidates = np.flatnonzero(np.abs(tab.rows[r, :nv]) > tol)
        if candidates.size:
            tab.pivot(r, int(candidates[0]))
        else:
            tab.rows = np.delete(tab.rows, r, axis=0)
            del tab.basis[r]
            del kept[r]

    tab.rows = np.delete(tab.rows, np.s_[nv : nv + m], axis=1)
    tab.optimize(lp.c, nv)

    x = np.zeros(nv)
    x[tab.basis] = tab.rows[:, -1]
    x = np.maximum(x, 0.0)

    duals = np.zeros(m)
    if kept:
        basis_matrix = a[np.ix_(kept, tab.basis)]
        duals[kept] = scipy.linalg.solve(basis_matrix.T, lp.c[tab.basis])
    duals *= sign

    logger.debug("simplex finished after %d pivots (%d redundant rows)", tab.pivots, m - len(kept))
    return LPResult(
        x=x,
        objective=float(lp.c @ x),
        duals=duals,
        basis=tuple(tab.basis),
        pivots=tab.pivots,
    )


def vertex_enumeration_oracle(lp: LinearProgram, tol: float = PIVOT_TOL) -> float:
    """Best objective over every basic feasible solution, by brute force.

    Only for programs with at most ``ORACLE_MAX_VARS`` variables that are
    bounded below on their feasible set.
    """
    if lp.num_vars > ORACLE_MAX_VARS:
        raise UnsupportedError(f"vertex enumeration is capped at {ORACLE_MAX_VARS} variables")
    a, b = lp.a_eq, lp.b_eq
    rank = int(np.linalg.matrix_rank(a)) if a.size else 0
    if rank:
        _, _, perm = scipy.linalg.qr(a.T, pivoting=True)
        rows = np.sort(perm[:rank])
    else:
        rows = np.array([], dtype=int)
    a_r, b_r = a[rows], b[rows]

    best: float | None = None
    scale = 1.0 + float(np.abs(b).sum())
    for cols in combinations(range(lp.num_vars), rank):
        x = np.zeros(lp.num_vars)
        if rank:
            sub = a_r[:, cols]
            if np.linalg.matrix_rank(sub) < rank:
                continue
            x[list(cols)] = np.linalg.solve(sub, b_r)
        if np.any(x < -tol) or np.abs(a @ x - b).max(initial=0.0) > tol * scale:
            continue
        value = float(lp.c @ np.maximum(x, 0.0))
        if best is None or value < best:
            best = value
    if best is None:
        raise LPInfeasibleError("no basic feasible solution")
    return best
