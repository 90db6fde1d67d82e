"""Configuration management for dsprec.

Experiment settings are layered: built-in defaults, then the user config file,
then an explicit ``--config`` file, then environment variables. Command-line
flags are applied last by the commands themselves.
"""

from __future__ import annotations

import os

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field, replace
from importlib.metadata import version as get_version
from pathlib import Path
from typing import Any

import platformdirs

from .loss import SeparableLoss
from .optimizer import RunConfig
from .precond import Preconditioner, make_preconditioner
from .problem import GenSpec, ProblemInstance, generate
from .reference import NormKind
from .utils.exceptions import ConfigError
from .utils.io import load_instance
from .utils.log import get_logger

logger = get_logger("config")


def _get_version() -> str:
    """Get version from package metadata (pyproject.toml)."""
    pkg = (__package__ or __name__).split(".")[0]
    try:
        return get_version(pkg)
    except Exception:
        # Development mode: read from pyproject.toml directly
        pyproject = Path(__file__).parent.parent.parent / "pyproject.toml"
        if pyproject.exists():
            with open(pyproject, "rb") as f:
                data = tomllib.load(f)
            return str(data.get("project", {}).get("version", "unknown"))
        raise


VERSION = _get_version()

DEFAULT_EPS_GRID = (0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0)
DEFAULT_ETA_GRID = (0.005, 0.01, 0.02, 0.05, 0.1)
DEFAULT_REFERENCES = ("L1", "L2", "Linf", "GD")
# The step size whose limit anchors the step-size sweep
REFERENCE_ETA = 0.005


def get_config_paths() -> list[Path]:
    """User config file locations that exist, lowest priority first."""
    user_config = Path(platformdirs.user_config_dir("dsprec")) / "config.toml"
    return [user_config] if user_config.exists() else []


def parse_config_file(path: Path) -> dict[str, Any]:
    """Read a TOML config file."""
    try:
        with open(path, "rb") as f:
            return tomllib.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"invalid TOML in {path}: {e}") from e


def _as_bool(value: str) -> bool:
    return value.lower() in ("true", "1", "yes")


@dataclass
class ProblemSection:
    """Generate an instance, or load one from ``path``."""

    n: int = 5
    d: int = 20
    k: int = 1
    seed: int = 1
    noise: float = 0.0
    path: Path | None = None

    def spec(self) -> GenSpec:
        return GenSpec(n=self.n, d=self.d, k=self.k, seed=self.seed, noise=self.noise)

    def instance(self) -> ProblemInstance:
        if self.path is not None:
            return load_instance(self.path)
        return generate(self.spec())


@dataclass
class PreconditionerSection:
    name: str = "adam_like"
    eps: float | None = 0.5

    def build(self, eps: float | None = None) -> Preconditioner:
        return make_preconditioner(self.name, self.eps if eps is None else eps)


@dataclass
class LossSection:
    kind: str = "squared"

    def build(self) -> SeparableLoss:
        return SeparableLoss.from_name(self.kind)


@dataclass
class SweepSection:
    """Swept parameter (``eps`` or ``eta``) and its grid; empty values mean the default grid."""

    parameter: str | None = None
    values: list[float] = field(default_factory=list)

    def grid(self, parameter: str) -> list[float]:
        if self.values and self.parameter in (None, parameter):
            return list(self.values)
        return list(DEFAULT_EPS_GRID if parameter == "eps" else DEFAULT_ETA_GRID)


_SECTION_KEYS: dict[str, tuple[str, ...]] = {
    "problem": ("n", "d", "k", "seed", "noise", "path"),
    "preconditioner": ("name", "eps"),
    "loss": ("kind",),
    "run": ("eta", "max_iters", "tol_grad_k", "tol_interp", "record_every", "strict_eta"),
    "sweep": ("parameter", "values"),
}
_TOP_LEVEL_KEYS = ("references", "output_dir", "jobs", "verbose")


@dataclass
class ExperimentConfig:
    """Everything a command needs to build an instance and run experiments."""

    problem: ProblemSection = field(default_factory=ProblemSection)
    preconditioner: PreconditionerSection = field(default_factory=PreconditionerSection)
    loss: LossSection = field(default_factory=LossSection)
    run: RunConfig = field(default_factory=RunConfig)
    sweep: SweepSection = field(default_factory=SweepSection)
    references: list[str] = field(default_factory=lambda: list(DEFAULT_REFERENCES))
    output_dir: Path = Path("results")
    jobs: int = field(default_factory=lambda: min(4, os.cpu_count() or 1))
    verbose: bool = False

    @classmethod
    def load(cls, path: Path | None = None) -> ExperimentConfig:
        """Load defaults, config files and environment variables, then validate."""
        config = cls()

        for user_path in get_config_paths():
            config._apply_file_config(parse_config_file(user_path), user_path.parent)

        if path is not None:
            if not path.exists():
                raise ConfigError(f"config file not found: {path}")
            config._apply_file_config(parse_config_file(path), path.parent)

        config._apply_env_vars()
        config.validate()
        return config

    def _apply_file_config(self, data: dict[str, Any], base: Path) -> None:
        """Apply values from a parsed TOML document."""
        for key, value in data.items():
            if key in _SECTION_KEYS:
                if not isinstance(value, dict):
                    raise ConfigError(f"[{key}] must be a table")
                unknown = set(value) - set(_SECTION_KEYS[key])
                if unknown:
                    raise ConfigError(f"unknown keys in [{key}]: {', '.join(sorted(unknown))}")
                self._apply_section(key, value, base)
            elif key in _TOP_LEVEL_KEYS:
                self._set_attr(key, value)
            else:
                raise ConfigError(f"unknown config key: {key}")

    def _apply_section(self, name: str, values: dict[str, Any], base: Path) -> None:
        try:
            match name:
                case "problem":
                    for key, value in values.items():
                        if key == "path":
                            value = (base / value) if not Path(value).is_absolute() else Path(value)
                        setattr(self.problem, key, value)
                case "preconditioner":
                    for key, value in values.items():
                        setattr(self.preconditioner, key, value)
                case "loss":
                    self.loss.kind = str(values["kind"])
                case "run":
                    self.run = replace(self.run, **values)
                case "sweep":
                    if "parameter" in values:
                        self.sweep.parameter = str(values["parameter"])
                    if "values" in values:
                        self.sweep.values = [float(v) for v in values["values"]]
        except (TypeError, ValueError) as e:
            raise ConfigError(f"invalid value in [{name}]: {e}") from e

    def _apply_env_vars(self) -> None:
        """Apply environment variables to config."""
        env_mapping = {
            "DSPREC_SEED": "seed",
            "DSPREC_JOBS": "jobs",
            "DSPREC_STRICT_ETA": "strict_eta",
            "DSPREC_OUTPUT_DIR": "output_dir",
            "DSPREC_VERBOSE": "verbose",
        }

        for env_key, attr in env_mapping.items():
            value = os.environ.get(env_key)
            if value is not None:
                self._set_attr(attr, value)

    def _set_attr(self, attr: str, value: Any) -> None:
        """Set a top-level or shortcut attribute with type coercion."""
        try:
            match attr:
                case "seed":
                    self.problem.seed = int(value)
                case "strict_eta":
                    flag = _as_bool(value) if isinstance(value, str) else bool(value)
                    self.run = replace(self.run, strict_eta=flag)
                case "jobs":
                    self.jobs = int(value)
                case "verbose":
                    self.verbose = _as_bool(value) if isinstance(value, str) else bool(value)
                case "output_dir":
                    self.output_dir = Path(value)
                case "references":
                    if isinstance(value, str):
                        value = [v.strip() for v in value.split(",") if v.strip()]
                    self.references = [str(v) for v in value]
        except (TypeError, ValueError) as e:
            raise ConfigError(f"invalid value for {attr}: {e}") from e

    def apply_overrides(
        self,
        *,
        out: Path | None = None,
        seed: int | None = None,
        strict_eta: bool = False,
        jobs: int | None = None,
        verbose: bool = False,
    ) -> ExperimentConfig:
        """Apply command-line flags, the highest priority layer."""
        if out is not None:
            self.output_dir = out
        if seed is not None:
            self.problem.seed = seed
        if strict_eta:
            self.run = replace(self.run, strict_eta=True)
        if jobs is not None:
            self.jobs = jobs
        if verbose:
            self.verbose = True
        self.validate()
        return self

    def validate(self) -> None:
        make_preconditioner(self.preconditioner.name, self.preconditioner.eps)
        self.loss.build()
        self.problem.spec()
        if self.problem.path is not None and not self.problem.path.exists():
            raise ConfigError(f"instance file not found: {self.problem.path}")
        if self.sweep.parameter not in (None, "eps", "eta"):
            raise ConfigError(f"sweep parameter must be eps or eta (got {self.sweep.parameter!r})")
        values = self.sweep.values
        if any(v <= 0 for v in values):
            raise ConfigError("sweep values must be positive")
        if any(b <= a for a, b in zip(values, values[1:], strict=False)):
            raise ConfigError("sweep values must be strictly increasing")
        for ref in self.references:
            if ref != "GD":
                NormKind.parse(ref)
        if self.jobs < 1:
            raise ConfigError(f"jobs must be at least 1 (got {self.jobs})")

    @property
    def norm_references(self) -> list[NormKind]:
        return [NormKind.parse(r) for r in self.references if r != "GD"]

    @property
    def wants_gd(self) -> bool:
        return "GD" in self.references

    def echo(self) -> dict[str, Any]:
        """Plain-data copy of the configuration for manifests."""
        return {
            "problem": {
                "n": self.problem.n,
                "d": self.problem.d,
                "k": self.problem.k,
                "seed": self.problem.seed,
                "noise": self.problem.noise,
                "path": None if self.problem.path is None else str(self.problem.path),
            },
            "preconditioner": {"name": self.preconditioner.name, "eps": self.preconditioner.eps},
            "loss": {"kind": self.loss.kind},
            "run": {
                "eta": self.run.eta,
                "max_iters": self.run.max_iters,
                "tol_grad_k": self.run.tol_grad_k,
                "tol_interp": self.run.tol_interp,
                "record_every": self.run.record_every,
                "strict_eta": self.run.strict_eta,
            },
            "sweep": {"parameter": self.sweep.parameter, "values": list(self.sweep.values)},
            "references": list(self.references),
        }
