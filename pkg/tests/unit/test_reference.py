"""Unit tests for dsprec.reference module."""

from __future__ import annotations

import numpy as np
import pytest

from dsprec.problem import GenSpec, generate, span_distance
from dsprec.reference import (
    NormKind,
    matrix_norm,
    min_l2_solution,
    min_lp_solution,
    reference_solution,
)
from dsprec.utils.exceptions import UnsupportedError
from tests.helpers.assertions import assert_interpolates

pytestmark = [pytest.mark.fast, pytest.mark.reference]


class TestNormKind:
    @pytest.mark.parametrize(("text", "kind"), [("L1", NormKind.L1), ("l2", NormKind.L2), (" linf ", NormKind.LINF)])
    def test_parse(self, text, kind):
        assert NormKind.parse(text) is kind

    def test_parse_unknown(self):
        with pytest.raises(UnsupportedError):
            NormKind.parse("L3")

    def test_matrix_norm(self):
        delta = np.array([[3.0, -1.0], [0.0, 4.0]])
        assert matrix_norm(delta, NormKind.L1) == 8.0
        assert matrix_norm(delta, NormKind.L2) == pytest.approx(np.sqrt(26.0))
        assert matrix_norm(delta, NormKind.LINF) == 4.0


class TestToyInstance:
    """Hand-checkable references for x = [1, 1], y = 2, W₀ = 0."""

    def test_l2(self, toy_instance):
        ref = min_l2_solution(toy_instance)
        np.testing.assert_allclose(ref.w_star, [[1.0], [1.0]])
        assert ref.objective == pytest.approx(np.sqrt(2.0))

    def test_l1(self, toy_instance):
        ref = min_lp_solution(toy_instance, NormKind.L1)
        assert ref.objective == pytest.approx(2.0)
        assert_interpolates(toy_instance, ref.w_star, 1e-12)

    def test_linf(self, toy_instance):
        ref = min_lp_solution(toy_instance, NormKind.LINF)
        np.testing.assert_allclose(ref.w_star, [[1.0], [1.0]], atol=1e-12)
        assert ref.objective == pytest.approx(1.0)


class TestMinL2:
    """Tests for the closed-form ℓ₂ reference."""

    def test_kkt_residual(self, instance):
        ref = min_l2_solution(instance)
        residual = ref.w_star - instance.w0 + instance.x.T @ ref.certificate
        assert np.linalg.norm(residual) <= 1e-10
        assert_interpolates(instance, ref.w_star, 1e-10)

    def test_difference_in_row_span(self, multi_output_instance):
        p = multi_output_instance
        ref = min_l2_solution(p)
        assert span_distance(p, ref.w_star - p.w0) <= 1e-10
        assert_interpolates(p, ref.w_star, 1e-10)

    def test_dispatch(self, instance):
        a = reference_solution(instance, NormKind.L2)
        np.testing.assert_array_equal(a.w_star, min_l2_solution(instance).w_star)


class TestMinLP:
    """Tests for the ℓ₁ and ℓ∞ references."""

    @pytest.mark.parametrize("kind", [NormKind.L1, NormKind.LINF])
    def test_interpolates(self, instance, kind):
        ref = min_lp_solution(instance, kind)
        assert_interpolates(instance, ref.w_star, 1e-9)
        assert ref.basis is not None

    @pytest.mark.parametrize("kind", [NormKind.L1, NormKind.LINF])
    def test_no_worse_than_min_l2(self, instance, kind):
        l2_delta = min_l2_solution(instance).w_star - instance.w0
        ref = min_lp_solution(instance, kind)
        assert ref.objective <= matrix_norm(l2_delta, kind) * (1 + 1e-9)

    def test_l1_dual_certificate(self, instance):
        ref = min_lp_solution(instance, NormKind.L1)
        rhs = (instance.y - instance.x @ instance.w0).ravel()
        y = ref.certificate.ravel()
        assert np.max(np.abs(instance.x.T @ y)) <= 1 + 1e-9
        assert float(rhs @ y) == pytest.approx(ref.objective, rel=1e-9)

    def test_l1_multi_output_by_column(self, multi_output_instance):
        p = multi_output_instance
        ref = min_lp_solution(p, NormKind.L1)
        assert_interpolates(p, ref.w_star, 1e-9)
        assert ref.certificate.shape == (p.n, p.k)
        assert len(ref.basis) == p.k

    def test_references_differ(self):
        p = generate(GenSpec(seed=1))
        refs = [reference_solution(p, kind).w_star for kind in NormKind]
        for i in range(len(refs)):
            for j in range(i + 1, len(refs)):
                assert np.linalg.norm(refs[i] - refs[j]) > 1e-6

    def test_linf_multi_output_unsupported(self, multi_output_instance):
        with pytest.raises(UnsupportedError):
            min_lp_solution(multi_output_instance, NormKind.LINF)

    def test_l2_not_an_lp(self, instance):
        with pytest.raises(UnsupportedError):
            min_lp_solution(instance, NormKind.L2)
