"""The verification suite behind ``dsprec verify``.

Runs the identity residual checks and bound checkers on the configured
instance and collects one result per check.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any

import numpy as np

from .bregman import (
    convexity_gap,
    fenchel_young_residual,
    fundamental_identity_residual,
    telescoped_identity_residual,
    three_point_residual,
)
from .config import ExperimentConfig
from .loss import SeparableLoss
from .optimizer import Trajectory, auxiliary_series, dspgd_run, fixed_point_check, gd_run, verify_steps
from .precond import Preconditioner
from .problem import ProblemInstance, derive_seed
from .reference import min_l2_solution
from .utils.exceptions import DsprecError
from .utils.log import get_logger
from .verify import (
    BoundReport,
    ProblemConstants,
    ProximityConfig,
    certified_alpha,
    check_divergence_contraction,
    check_gradient_decay,
    check_proximity_bounds,
    check_rate_envelope,
    descent_lemma_check,
    example_alpha,
    hessian_sandwich_check,
    trajectory_radius,
)

logger = get_logger("suite")

RANDOM_SAMPLES = 200
BOUND_SAMPLES = 100
# Per-step identity checks are run on at most this many evenly spaced steps
IDENTITY_STEPS = 500
TELESCOPE_STEPS = 2000


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    detail: str

    def as_dict(self) -> dict[str, Any]:
        return {"name": self.name, "passed": self.passed, "value": self.value, "detail": self.detail}


def _from_report(report: BoundReport) -> CheckResult:
    return CheckResult(report.bound_name, report.holds, report.worst_margin, report.summary())


def _residual_check(name: str, worst: float, tol: float) -> CheckResult:
    return CheckResult(name, worst <= tol, worst, f"worst relative residual {worst:.3e} (tol {tol:g})")


def _random_weights(p: ProblemInstance, rng: np.random.Generator) -> np.ndarray:
    return p.w0 + rng.standard_normal((p.d, p.k))


@dataclass
class VerifySuite:
    """Checks on one instance with one preconditioner and step size."""

    p: ProblemInstance
    loss: SeparableLoss
    precond: Preconditioner
    config: ExperimentConfig
    seed: int = 0

    def _rng(self, stream: int) -> np.random.Generator:
        """Independent sampling stream per check, derived from the suite seed."""
        return np.random.default_rng(derive_seed(self.seed, stream))

    def run(self) -> list[CheckResult]:
        results: list[CheckResult] = []
        for check in (self._dual_identities, self._convexity, self._trajectory_checks, self._loss_geometry):
            try:
                results.extend(check())
            except DsprecError as e:
                name = check.__name__.lstrip("_")
                logger.warning("%s failed: %s", name, e)
                results.append(CheckResult(name, False, float("nan"), str(e)))
        return results

    def _dual_identities(self) -> list[CheckResult]:
        rng = self._rng(0)
        p, loss = self.p, self.loss
        fy = max(fenchel_young_residual(p, loss, _random_weights(p, rng)).rel_residual for _ in range(RANDOM_SAMPLES))
        tp = max(
            three_point_residual(
                p, loss, _random_weights(p, rng), _random_weights(p, rng), _random_weights(p, rng)
            ).rel_residual
            for _ in range(RANDOM_SAMPLES)
        )
        return [_residual_check("fenchel_young", fy, 1e-9), _residual_check("three_point", tp, 1e-10)]

    def _convexity(self) -> list[CheckResult]:
        rng = self._rng(1)
        eta = 0.5 * self.precond.eta_max(self.p.n, self.p.spectra)
        worst = min(
            convexity_gap(self.p, self.loss, self.precond, _random_weights(self.p, rng), _random_weights(self.p, rng), eta)
            for _ in range(BOUND_SAMPLES)
        )
        return [CheckResult("convexity_gap", worst >= -1e-12, worst, f"smallest gap {worst:.3e} at eta={eta:.6g}")]

    def _runs(self) -> tuple[Trajectory, Trajectory]:
        cfg = replace(self.config.run, record_every=1)
        return dspgd_run(self.p, self.loss, self.precond, cfg), gd_run(self.p, self.loss, cfg)

    def _trajectory_checks(self) -> list[CheckResult]:
        p, loss, precond = self.p, self.loss, self.precond
        traj, gd = self._runs()
        results = [
            CheckResult(
                "fixed_point",
                fixed_point_check(traj, p) <= 10 * self.config.run.tol_interp,
                traj.interp_residual,
                f"{traj.method}: converged in {traj.iters_used} iterations",
            ),
            _residual_check("step_rule", verify_steps(traj, p, loss, precond), 1e-14 * (1.0 + float(np.abs(traj.iterates).max()))),
        ]
        final_k = float(traj.k_value_series[-1])
        results.append(CheckResult("k_summability", final_k <= 1e-10, final_k, f"final K value {final_k:.3e}"))

        steps = np.unique(np.linspace(0, traj.iters_used - 1, min(IDENTITY_STEPS, traj.iters_used)).astype(int))
        targets = [traj.final_w, traj.w0 + 0.5 * (traj.final_w - traj.w0), min_l2_solution(p).w_star]
        worst = 0.0
        anchors: set[str] = set()
        for i in steps:
            for w in targets:
                rep = fundamental_identity_residual(
                    p, loss, precond, w, traj.iterates[i], traj.iterates[i + 1], traj.eta
                )
                worst = max(worst, rep.rel_residual)
                if rep.anchor is not None:
                    anchors.add(rep.anchor.value)
        ident = _residual_check("fundamental_identity", worst, 1e-9)
        results.append(replace(ident, detail=f"{ident.detail}; D_K anchor: {', '.join(sorted(anchors)) or 'n/a'}"))

        head = replace(
            traj,
            iterates=traj.iterates[: TELESCOPE_STEPS + 1],
            indices=traj.indices[: TELESCOPE_STEPS + 1],
        )
        tele = telescoped_identity_residual(p, loss, precond, head, traj.final_w)
        results.append(_residual_check("telescoped_identity", tele.rel_residual, 1e-8))

        aux = auxiliary_series(traj, p, loss, precond)
        worst_aux = float(np.max(aux.gap_series - aux.gap_bound_series, initial=0.0))
        results.append(CheckResult("auxiliary_gap", aux.holds, worst_aux, "||W_hat_i - W_i|| <= eta (L_K + 1) ||grad||"))

        results.extend(self._bound_checks(traj, gd))
        return results

    def _bound_checks(self, traj: Trajectory, gd: Trajectory) -> list[CheckResult]:
        p, loss, precond = self.p, self.loss, self.precond
        results: list[CheckResult] = []
        constants = ProblemConstants.build(p, loss, precond)
        visited = ProblemConstants.build(p, loss, precond, trajectory_radius(traj, p, loss, precond))

        if precond.isotropic:
            results.append(_from_report(check_rate_envelope(traj, visited, precond)))
            w_star = min_l2_solution(p).w_star
            bias = float(np.linalg.norm(traj.final_w - w_star) / (1.0 + np.linalg.norm(w_star)))
            results.append(CheckResult("implicit_bias_l2", bias <= 1e-6, bias, f"relative distance to min-L2 {bias:.3e}"))
        if precond.name == "quadratic":
            same = bool(np.array_equal(traj.final_w, gd.final_w))
            results.append(CheckResult("gd_equivalence", same, 0.0, "DSPGD with quadratic K reproduces GD"))

        eta = traj.eta
        prox = ProximityConfig(alpha=example_alpha(eta, constants), eta=eta, constants=constants)
        bound_a, bound_b = check_proximity_bounds(traj, gd, p, loss, prox)
        results += [_from_report(bound_a), _from_report(bound_b)]

        cert = ProximityConfig(alpha=certified_alpha(visited), eta=eta, constants=visited)
        decay, gd_decay = check_gradient_decay(traj, gd, p, loss, cert)
        results += [_from_report(decay), _from_report(gd_decay)]
        results.append(
            _from_report(check_divergence_contraction(traj, p, loss, precond, min_l2_solution(p).w_star, cert.alpha))
        )
        return results

    def _loss_geometry(self) -> list[CheckResult]:
        return [
            _from_report(descent_lemma_check(self.p, self.loss, BOUND_SAMPLES, derive_seed(self.seed, 2))),
            _from_report(hessian_sandwich_check(self.p, self.loss, BOUND_SAMPLES, derive_seed(self.seed, 3))),
        ]


def run_verify_suite(config: ExperimentConfig, p: ProblemInstance | None = None) -> list[CheckResult]:
    p = p or config.problem.instance()
    suite = VerifySuite(
        p=p,
        loss=config.loss.build(),
        precond=config.preconditioner.build(),
        config=config,
        seed=config.problem.seed,
    )
    return suite.run()

