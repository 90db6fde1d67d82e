"""Dual reference functions K used as gradient-space preconditioners.

Each preconditioner carries K, ∇K, the Lipschitz constant L_K of ∇K, the
strong-convexity floor m_K(r) on a ball of radius r, and its step-size rules.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass
from functools import partial

import numpy as np

from .problem import SpectralInfo
from .utils.exceptions import ConfigError
from .utils.log import get_logger

logger = get_logger("precond")

PRECONDITIONERS = ("normalized_gd", "grad_clip", "adam_like", "quadratic")


def _frobenius(z: np.ndarray) -> float:
    return float(np.linalg.norm(z))


def _max_abs(z: np.ndarray) -> float:
    return float(np.max(np.abs(z))) if z.size else 0.0


@dataclass(frozen=True)
class Preconditioner:
    """A convex K with K ≥ 0 and K(G) = 0 only where ∇K(G) = 0.

    For isotropic K, ``profile`` is h and ``profile_deriv`` is h′ with
    K(G) = h(‖G‖_F). ``radius`` measures a gradient in the norm the m_K
    ball is taken in.
    """

    name: str
    eps: float | None
    value: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    lipschitz: float
    strong_convexity_on_ball: Callable[[float], float]
    isotropic: bool
    literal_step: Callable[[int, SpectralInfo], float]
    radius: Callable[[np.ndarray], float] = _frobenius
    profile: Callable[[float], float] | None = None
    profile_deriv: Callable[[float], float] | None = None

    @property
    def label(self) -> str:
        return self.name if self.eps is None else f"{self.name}(eps={self.eps:g})"

    def eta_max(self, n: int, spectra: SpectralInfo) -> float:
        """Largest η with 𝓛* − ηK convex on the span for the squared loss: n/(L_K σ₁)."""
        return n / (self.lipschitz * spectra.sigma1_gram)

    def eta_max_literal(self, n: int, spectra: SpectralInfo) -> float:
        """The unscaled rule as stated alongside each example (nε, n·max{ε,1}, ...)."""
        return self.literal_step(n, spectra)


def _check_eps(eps: float) -> float:
    if not eps > 0:
        raise ConfigError(f"eps must be positive (got {eps})")
    return float(eps)


# normalized GD: h(t) = t − ε·log(1 + t/ε)


def _ngd_profile(t: float, eps: float) -> float:
    return t - eps * float(np.log1p(t / eps))


def _ngd_profile_deriv(t: float, eps: float) -> float:
    return t / (eps + t)


def _ngd_value(z: np.ndarray, eps: float) -> float:
    return _ngd_profile(_frobenius(z), eps)


def _ngd_grad(z: np.ndarray, eps: float) -> np.ndarray:
    return z / (eps + _frobenius(z))


def _log_ball_floor(r: float, eps: float) -> float:
    return eps / (eps + r) ** 2


def make_normalized_gd(eps: float) -> Preconditioner:
    """∇K(Z) = Z/(ε + ‖Z‖_F).

    K is shifted by the constant ε·log ε so that K(0) = 0.
    """
    eps = _check_eps(eps)
    return Preconditioner(
        name="normalized_gd",
        eps=eps,
        value=partial(_ngd_value, eps=eps),
        grad=partial(_ngd_grad, eps=eps),
        lipschitz=1.0 / eps,
        strong_convexity_on_ball=partial(_log_ball_floor, eps=eps),
        isotropic=True,
        literal_step=lambda n, _s: n * eps,
        profile=partial(_ngd_profile, eps=eps),
        profile_deriv=partial(_ngd_profile_deriv, eps=eps),
    )


# gradient clipping: quadratic inside the ε-ball, linear outside


def _clip_profile(t: float, eps: float) -> float:
    return 0.5 * t * t if t <= eps else eps * t - 0.5 * eps * eps


def _clip_profile_deriv(t: float, eps: float) -> float:
    return min(t, eps)


def _clip_value(z: np.ndarray, eps: float) -> float:
    return _clip_profile(_frobenius(z), eps)


def _clip_grad(z: np.ndarray, eps: float) -> np.ndarray:
    t = _frobenius(z)
    if t <= eps:
        return np.array(z, dtype=np.float64, copy=True)
    return (eps / t) * z


def _clip_ball_floor(r: float, eps: float) -> float:
    return 1.0 if r <= eps else eps / r


def make_grad_clip(eps: float) -> Preconditioner:
    """∇K(Z) = min{ε/‖Z‖_F, 1}·Z."""
    eps = _check_eps(eps)
    return Preconditioner(
        name="grad_clip",
        eps=eps,
        value=partial(_clip_value, eps=eps),
        grad=partial(_clip_grad, eps=eps),
        lipschitz=1.0,
        strong_convexity_on_ball=partial(_clip_ball_floor, eps=eps),
        isotropic=True,
        literal_step=lambda n, _s: n * max(eps, 1.0),
        profile=partial(_clip_profile, eps=eps),
        profile_deriv=partial(_clip_profile_deriv, eps=eps),
    )


# Adam without momentum: entrywise version of the normalized GD profile


def _adam_value(z: np.ndarray, eps: float) -> float:
    a = np.abs(z)
    return float(np.sum(a - eps * np.log1p(a / eps)))


def _adam_grad(z: np.ndarray, eps: float) -> np.ndarray:
    return z / (eps + np.abs(z))


def make_adam_like(eps: float) -> Preconditioner:
    """Entrywise ∇K(Z) = Z/(ε + |Z|), value 0 at zero entries.

    K is shifted by ε·log ε per entry so that K(0) = 0. The m_K ball is
    measured by the largest gradient entry.
    """
    eps = _check_eps(eps)
    return Preconditioner(
        name="adam_like",
        eps=eps,
        value=partial(_adam_value, eps=eps),
        grad=partial(_adam_grad, eps=eps),
        lipschitz=1.0 / eps,
        strong_convexity_on_ball=partial(_log_ball_floor, eps=eps),
        isotropic=False,
        literal_step=lambda n, _s: n * eps,
        radius=_max_abs,
    )


def _quad_value(z: np.ndarray) -> float:
    return 0.5 * float(np.sum(z * z))


def _quad_grad(z: np.ndarray) -> np.ndarray:
    return np.array(z, dtype=np.float64, copy=True)


def make_quadratic() -> Preconditioner:
    """K = ½‖Z‖_F², under which the iteration is plain gradient descent."""
    return Preconditioner(
        name="quadratic",
        eps=None,
        value=_quad_value,
        grad=_quad_grad,
        lipschitz=1.0,
        strong_convexity_on_ball=lambda _r: 1.0,
        isotropic=True,
        literal_step=lambda n, s: n / s.sigma1_gram,
        profile=lambda t: 0.5 * t * t,
        profile_deriv=lambda t: t,
    )


def make_preconditioner(name: str, eps: float | None = None) -> Preconditioner:
    """Build a preconditioner from its config name."""
    match name:
        case "normalized_gd":
            return make_normalized_gd(_require_eps(name, eps))
        case "grad_clip":
            return make_grad_clip(_require_eps(name, eps))
        case "adam_like":
            return make_adam_like(_require_eps(name, eps))
        case "quadratic":
            return make_quadratic()
        case _:
            raise ConfigError(
                f"unknown preconditioner {name!r}, expected one of {', '.join(PRECONDITIONERS)}"
            )


def _require_eps(name: str, eps: float | None) -> float:
    if eps is None:
        raise ConfigError(f"preconditioner {name!r} needs an eps value")
    return eps


def _ball_sample(rng: np.random.Generator, shape: tuple[int, ...], radius: float) -> np.ndarray:
    z = rng.standard_normal(shape)
    size = int(np.prod(shape))
    scale = radius * rng.uniform() ** (1.0 / size)
    return z * (scale / np.linalg.norm(z))


def check_lipschitz(
    p: Preconditioner,
    samples: int,
    radius: float,
    seed: int,
    shape: tuple[int, ...] = (6, 2),
) -> float:
    """Largest ‖∇K(A) − ∇K(B)‖/‖A − B‖ over random pairs in the radius ball."""
    if samples < 2:
        raise ValueError(f"need at least 2 samples (got {samples})")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        a = _ball_sample(rng, shape, radius)
        b = _ball_sample(rng, shape, radius)
        gap = float(np.linalg.norm(a - b))
        if gap == 0.0:
            continue
        worst = max(worst, float(np.linalg.norm(p.grad(a) - p.grad(b))) / gap)
    logger.debug("%s: worst Lipschitz ratio %.6g (declared %.6g)", p.label, worst, p.lipschitz)
    return worst
