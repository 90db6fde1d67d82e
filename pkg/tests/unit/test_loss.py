"""Unit tests for dsprec.loss module."""

from __future__ import annotations

import numpy as np
import pytest

from dsprec import reference
from dsprec.loss import (
    LossFunctional,
    LossKind,
    SeparableLoss,
    SpanElement,
    dual_value,
    loss_gradient,
    loss_value,
    min_loss,
    residual_coefficients,
)
from dsprec.utils.exceptions import ConfigError, IllConditionedError

pytestmark = pytest.mark.fast


def _finite_difference(p, loss, w, h=1e-6):
    grad = np.zeros_like(w)
    for idx in np.ndindex(w.shape):
        e = np.zeros_like(w)
        e[idx] = h
        grad[idx] = (loss_value(p, loss, w + e) - loss_value(p, loss, w - e)) / (2 * h)
    return grad


class TestSeparableLoss:
    """Tests for loss construction."""

    def test_squared_constants(self, squared):
        assert squared.kind is LossKind.SQUARED
        assert (squared.mu, squared.m_upper) == (1.0, 1.0)

    def test_log_cosh_constants(self, log_cosh):
        assert log_cosh.kind is LossKind.CUSTOM
        assert (log_cosh.mu, log_cosh.m_upper) == (1.0, 2.0)

    def test_from_name(self):
        assert SeparableLoss.from_name("squared").name == "squared"
        assert SeparableLoss.from_name("log_cosh").name == "log_cosh"

    def test_from_name_unknown(self):
        with pytest.raises(ConfigError):
            SeparableLoss.from_name("hinge")

    def test_rejects_inverted_constants(self):
        with pytest.raises(ValueError):
            SeparableLoss.custom(lambda z: z * z, lambda z: 2 * z, mu=2.0, m_upper=1.0)

    def test_log_cosh_stable_for_large_residuals(self, log_cosh):
        z = np.array([1e3, -1e3])
        assert np.all(np.isfinite(log_cosh.entry_value(z)))
        assert log_cosh.entry_value(np.zeros(1))[0] == pytest.approx(0.0)


class TestGradients:
    """Tests for loss values and gradients."""

    def test_squared_value(self, instance, squared):
        w = instance.w0
        expected = np.sum((instance.x @ w - instance.y) ** 2) / (2 * instance.n)
        assert loss_value(instance, squared, w) == pytest.approx(expected)

    @pytest.mark.parametrize("loss_name", ["squared", "log_cosh"])
    def test_gradient_matches_finite_differences(self, multi_output_instance, loss_name):
        p = multi_output_instance
        loss = SeparableLoss.from_name(loss_name)
        w = p.w0 + 0.3
        np.testing.assert_allclose(loss_gradient(p, loss, w), _finite_difference(p, loss, w), atol=1e-6)

    def test_gradient_lies_in_span(self, instance, log_cosh):
        lam = residual_coefficients(instance, log_cosh, instance.w0)
        np.testing.assert_allclose(loss_gradient(instance, log_cosh, instance.w0), instance.x.T @ lam)

    def test_functional_wraps_value_and_grad(self, instance, squared):
        f = LossFunctional(instance, squared)
        assert f.value(instance.w0) == loss_value(instance, squared, instance.w0)
        np.testing.assert_array_equal(f.grad(instance.w0), loss_gradient(instance, squared, instance.w0))

    def test_min_loss_is_zero(self, instance, squared):
        assert min_loss(instance, squared) == pytest.approx(0.0, abs=1e-18)

    def test_min_loss_raises_when_ill_conditioned(self, instance, squared, monkeypatch):
        monkeypatch.setattr(reference, "COND_LIMIT", 1.0)
        with pytest.raises(IllConditionedError):
            min_loss(instance, squared)


class TestDual:
    """Tests for the Fenchel dual on the span."""

    def test_span_element_round_trip(self, multi_output_instance):
        p = multi_output_instance
        lam = np.random.default_rng(0).standard_normal((p.n, p.k))
        g = SpanElement(lam).matrix(p)
        np.testing.assert_allclose(SpanElement.from_matrix(p, g).lam, lam, atol=1e-10)

    def test_squared_closed_form(self, instance, squared):
        lam = np.random.default_rng(1).standard_normal((instance.n, 1))
        expected = float(np.sum(instance.y * lam) + 0.5 * instance.n * np.sum(lam * lam))
        assert dual_value(instance, squared, SpanElement(lam)) == pytest.approx(expected)

    def test_numeric_dual_agrees_with_closed_form(self, instance, squared):
        numeric = SeparableLoss.custom(lambda z: 0.5 * z * z, lambda z: z, 1.0, 1.0, "squared_numeric")
        lam = 0.1 * np.random.default_rng(2).standard_normal((instance.n, 1))
        exact = dual_value(instance, squared, SpanElement(lam))
        solved = dual_value(instance, numeric, SpanElement(lam))
        assert solved == pytest.approx(exact, rel=1e-8, abs=1e-10)

    def test_dual_at_zero(self, instance, squared):
        assert dual_value(instance, squared, SpanElement(np.zeros((instance.n, 1)))) == 0.0
