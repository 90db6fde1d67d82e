"""Problem data model for overparameterized linear models.

Holds the data matrix X (n×d), labels Y (n×k) and the initialization W₀,
together with the gram spectrum that controls every rate constant.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg

from .utils.exceptions import ConfigError, RankDeficiencyError, ShapeError
from .utils.log import get_logger

logger = get_logger("problem")

# Relative floor on σₙ(XXᵀ)/σ₁(XXᵀ)
RANK_TOL = 1e-10


@dataclass(frozen=True)
class SpectralInfo:
    """Extreme eigenvalues of the gram matrix XXᵀ."""

    sigma1_gram: float
    sigman_gram: float

    @property
    def condition(self) -> float:
        return self.sigma1_gram / self.sigman_gram


@dataclass(frozen=True)
class GenSpec:
    """Parameters of the synthetic planted-model generator."""

    n: int = 5
    d: int = 20
    k: int = 1
    seed: int = 1
    noise: float = 0.0

    def __post_init__(self) -> None:
        if self.n < 1 or self.k < 1:
            raise ConfigError(f"n and k must be positive (got n={self.n}, k={self.k})")
        if self.d <= self.n:
            raise ConfigError(f"overparameterized regime requires d > n (got n={self.n}, d={self.d})")
        if self.noise < 0:
            raise ConfigError(f"noise must be nonnegative (got {self.noise})")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must fit in 64 bits (got {self.seed})")


def _frozen(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=np.float64, copy=True)
    out.flags.writeable = False
    return out


def _eig_extremes(x: np.ndarray) -> SpectralInfo:
    eigs = np.linalg.eigvalsh(x @ x.T)
    sigma1, sigman = float(eigs[-1]), float(eigs[0])
    if not (np.isfinite(sigma1) and np.isfinite(sigman)):
        raise RankDeficiencyError("gram spectrum is not finite")
    if sigma1 <= 0 or sigman / sigma1 < RANK_TOL:
        raise RankDeficiencyError(
            f"X is rank deficient: sigma_n/sigma_1 = {sigman / sigma1 if sigma1 > 0 else 0.0:.3e}"
        )
    return SpectralInfo(sigma1_gram=sigma1, sigman_gram=sigman)


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """An overparameterized linear regression problem.

    Arrays are copied and marked read-only on construction, so an instance
    can be shared between concurrent runs.
    """

    x: np.ndarray
    y: np.ndarray
    w0: np.ndarray
    w_true: np.ndarray | None = None
    seed: int | None = None
    noise: float = 0.0

    def __post_init__(self) -> None:
        x, y, w0 = (np.asarray(a) for a in (self.x, self.y, self.w0))
        if x.ndim != 2 or y.ndim != 2 or w0.ndim != 2:
            raise ShapeError("x, y and w0 must be 2-D matrices")
        n, d = x.shape
        if y.shape[0] != n:
            raise ShapeError(f"y has {y.shape[0]} rows, expected {n}")
        k = y.shape[1]
        if w0.shape != (d, k):
            raise ShapeError(f"w0 has shape {w0.shape}, expected {(d, k)}")
        if not (d > n >= 1 and k >= 1):
            raise ShapeError(f"overparameterized regime requires d > n >= 1 (got n={n}, d={d})")
        object.__setattr__(self, "x", _frozen(x))
        object.__setattr__(self, "y", _frozen(y))
        object.__setattr__(self, "w0", _frozen(w0))
        if self.w_true is not None:
            w_true = np.asarray(self.w_true)
            if w_true.shape != (d, k):
                raise ShapeError(f"w_true has shape {w_true.shape}, expected {(d, k)}")
            object.__setattr__(self, "w_true", _frozen(w_true))
        # Rejects rank-deficient X up front
        _ = self.spectra

    @property
    def n(self) -> int:
        return int(self.x.shape[0])

    @property
    def d(self) -> int:
        return int(self.x.shape[1])

    @property
    def k(self) -> int:
        return int(self.y.shape[1])

    @cached_property
    def spectra(self) -> SpectralInfo:
        return _eig_extremes(self.x)

    @cached_property
    def gram(self) -> np.ndarray:
        return _frozen(self.x @ self.x.T)

    def with_w0(self, w0: np.ndarray) -> ProblemInstance:
        """Return a copy of this instance started from a different W₀."""
        return ProblemInstance(
            x=self.x, y=self.y, w0=w0, w_true=self.w_true, seed=self.seed, noise=self.noise
        )

    def check_weights(self, w: np.ndarray) -> np.ndarray:
        """Validate a weight matrix against this instance's shape."""
        w = np.asarray(w, dtype=np.float64)
        if w.shape != (self.d, self.k):
            raise ShapeError(f"weights have shape {w.shape}, expected {(self.d, self.k)}")
        return w


def gram_spectrum(p: ProblemInstance) -> SpectralInfo:
    """Largest and smallest eigenvalues of XXᵀ via a symmetric eigen-solve."""
    return _eig_extremes(p.x)


def interpolation_residual(p: ProblemInstance, w: np.ndarray) -> float:
    """Frobenius norm of XW − Y, zero exactly on the interpolating manifold."""
    w = p.check_weights(w)
    return float(np.linalg.norm(p.x @ w - p.y))


def null_space(p: ProblemInstance) -> np.ndarray:
    """Orthonormal basis (d × (d−n)) of the null space of X."""
    return scipy.linalg.null_space(p.x)


def span_distance(p: ProblemInstance, delta: np.ndarray) -> float:
    """Distance of a d×k matrix to the span subspace {XᵀΛ}."""
    delta = p.check_weights(delta)
    basis = null_space(p)
    return float(np.linalg.norm(basis.T @ delta))


def generate(spec: GenSpec) -> ProblemInstance:
    """Draw a planted-model instance.

    X and W_true are standard normal, Y = X·W_true + noise·E with E standard
    normal and W₀ is standard normal scaled by 0.1. The noise matrix is always
    drawn so that X, W_true and W₀ do not depend on the noise level.
    """
    rng = np.random.default_rng(spec.seed)
    x = rng.standard_normal((spec.n, spec.d))
    w_true = rng.standard_normal((spec.d, spec.k))
    noise = rng.standard_normal((spec.n, spec.k))
    w0 = 0.1 * rng.standard_normal((spec.d, spec.k))
    y = x @ w_true
    if spec.noise > 0:
        y = y + spec.noise * noise
    logger.debug("generated instance n=%d d=%d k=%d seed=%d", spec.n, spec.d, spec.k, spec.seed)
    return ProblemInstance(x=x, y=y, w0=w0, w_true=w_true, seed=spec.seed, noise=spec.noise)


def derive_seed(seed: int, index: int) -> int:
    """Per-run seed for sweep point ``index`` derived from the global seed."""
    child = np.random.SeedSequence(seed).spawn(index + 1)[index]
    return int(child.generate_state(1, dtype=np.uint64)[0])
