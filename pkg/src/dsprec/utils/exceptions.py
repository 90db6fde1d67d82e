"""Custom exceptions for dsprec."""

from __future__ import annotations


class DsprecError(Exception):
    """Base exception for dsprec errors."""

    exit_code: int = 1

    def __init__(self, message: str, exit_code: int | None = None) -> None:
        super().__init__(message)
        if exit_code is not None:
            self.exit_code = exit_code


class ConfigError(DsprecError):
    """Invalid configuration file, flag or environment variable."""

    exit_code = 2


class UnsupportedError(DsprecError):
    """Requested combination is outside what the tool supports."""

    exit_code = 2


class InstanceFormatError(DsprecError):
    """Instance file does not follow the DSPREC v1 text format."""

    exit_code = 2


class ShapeError(DsprecError):
    """Matrix shapes do not agree."""

    pass


class RankDeficiencyError(DsprecError):
    """Data matrix does not have full row rank."""

    pass


class IllConditionedError(DsprecError):
    """Gram matrix condition number is above the solver guard."""

    pass


class StepSizeError(DsprecError):
    """Step size exceeds the admissible bound in strict mode."""

    exit_code = 2


class DivergenceError(DsprecError):
    """Iteration produced non-finite values or an exploding loss."""

    def __init__(self, message: str, iteration: int) -> None:
        super().__init__(f"{message} (iteration {iteration})")
        self.iteration = iteration


class NotConvergedError(DsprecError):
    """Operation requires a converged trajectory."""

    pass


class DualSolveError(DsprecError):
    """Numeric inner maximization for the Fenchel dual did not converge."""

    pass


class PreconditionError(DsprecError):
    """Arguments violate the precondition of an identity check."""

    pass


class LPError(DsprecError):
    """Linear program could not be solved."""

    pass


class LPInfeasibleError(LPError):
    """Linear program has an empty feasible set."""

    pass


class LPUnboundedError(LPError):
    """Linear program is unbounded below."""

    pass


class LPIterationLimitError(LPError):
    """Simplex iteration cap exceeded."""

    pass
