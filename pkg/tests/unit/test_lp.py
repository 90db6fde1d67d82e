"""Unit tests for dsprec.reference.lp module."""

from __future__ import annotations

import numpy as np
import pytest

from dsprec.problem import GenSpec, generate
from dsprec.reference.lp import LinearProgram, lp_solve, vertex_enumeration_oracle
from dsprec.utils.exceptions import (
    LPInfeasibleError,
    LPIterationLimitError,
    LPUnboundedError,
    ShapeError,
    UnsupportedError,
)

pytestmark = [pytest.mark.fast, pytest.mark.reference]


def _l1_program(seed: int) -> LinearProgram:
    p = generate(GenSpec(n=2, d=4, seed=seed))
    return LinearProgram(c=np.ones(8), a_eq=np.hstack([p.x, -p.x]), b_eq=(p.y - p.x @ p.w0).ravel())


class TestLinearProgram:
    def test_shape_check(self):
        with pytest.raises(ShapeError):
            LinearProgram(c=np.ones(3), a_eq=np.ones((2, 2)), b_eq=np.ones(2))

    def test_sizes(self):
        lp = LinearProgram(c=np.ones(3), a_eq=np.ones((2, 3)), b_eq=np.ones(2))
        assert (lp.num_vars, lp.num_rows) == (3, 2)


class TestSolve:
    """Tests for the two-phase simplex."""

    def test_small_program(self):
        # min x1 + x2 s.t. x1 + 2 x2 = 4
        lp = LinearProgram(c=np.array([1.0, 1.0]), a_eq=np.array([[1.0, 2.0]]), b_eq=np.array([4.0]))
        result = lp_solve(lp)
        np.testing.assert_allclose(result.x, [0.0, 2.0], atol=1e-12)
        assert result.objective == pytest.approx(2.0)
        assert result.duals == pytest.approx([0.5])

    def test_negative_rhs(self):
        lp = LinearProgram(c=np.array([1.0, 3.0]), a_eq=np.array([[-1.0, -1.0]]), b_eq=np.array([-2.0]))
        result = lp_solve(lp)
        assert result.objective == pytest.approx(2.0)
        # Dual feasibility Aᵀy ≤ c and strong duality bᵀy = cᵀx
        assert np.all(lp.a_eq.T @ result.duals <= lp.c + 1e-9)
        assert float(lp.b_eq @ result.duals) == pytest.approx(result.objective)

    def test_redundant_row(self):
        a = np.array([[1.0, 1.0, 0.0], [2.0, 2.0, 0.0], [0.0, 1.0, 1.0]])
        lp = LinearProgram(c=np.array([1.0, 2.0, 1.0]), a_eq=a, b_eq=np.array([1.0, 2.0, 1.0]))
        result = lp_solve(lp)
        np.testing.assert_allclose(lp.a_eq @ result.x, lp.b_eq, atol=1e-9)
        assert result.objective == pytest.approx(vertex_enumeration_oracle(lp))

    def test_infeasible(self):
        lp = LinearProgram(c=np.ones(2), a_eq=np.array([[1.0, 1.0]]), b_eq=np.array([-1.0]))
        with pytest.raises(LPInfeasibleError):
            lp_solve(lp)

    def test_unbounded(self):
        lp = LinearProgram(c=np.array([-1.0, 0.0]), a_eq=np.array([[1.0, -1.0]]), b_eq=np.array([1.0]))
        with pytest.raises(LPUnboundedError):
            lp_solve(lp)

    def test_pivot_limit(self):
        lp = LinearProgram(c=np.array([1.0, 1.0]), a_eq=np.array([[1.0, 2.0]]), b_eq=np.array([4.0]))
        with pytest.raises(LPIterationLimitError):
            lp_solve(lp, max_pivots=0)

    @pytest.mark.parametrize("seed", [1, 2, 3, 4, 5])
    def test_matches_vertex_enumeration(self, seed):
        lp = _l1_program(seed)
        result = lp_solve(lp)
        assert result.objective == pytest.approx(vertex_enumeration_oracle(lp), rel=1e-9, abs=1e-12)
        np.testing.assert_allclose(lp.a_eq @ result.x, lp.b_eq, atol=1e-9)
        assert np.all(result.x >= 0.0)

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_strong_duality(self, seed):
        lp = _l1_program(seed)
        result = lp_solve(lp)
        assert float(lp.b_eq @ result.duals) == pytest.approx(result.objective, rel=1e-9)
        assert np.all(lp.a_eq.T @ result.duals <= lp.c + 1e-9)


class TestVertexEnumeration:
    def test_caps_size(self):
        lp = LinearProgram(c=np.ones(11), a_eq=np.ones((1, 11)), b_eq=np.ones(1))
        with pytest.raises(UnsupportedError):
            vertex_enumeration_oracle(lp)

    def test_infeasible(self):
        lp = LinearProgram(c=np.ones(2), a_eq=np.array([[1.0, 1.0]]), b_eq=np.array([-1.0]))
        with pytest.raises(LPInfeasibleError):
            vertex_enumeration_oracle(lp)
