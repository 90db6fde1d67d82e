"""Core fixtures and configuration for dsprec tests."""

from __future__ import annotations

import os
import subprocess
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pytest

from dsprec.loss import SeparableLoss
from dsprec.optimizer import RunConfig
from dsprec.precond import make_adam_like, make_normalized_gd
from dsprec.problem import GenSpec, ProblemInstance, generate

SRC_DIR = Path(__file__).resolve().parent.parent / "src"


@dataclass
class CommandResult:
    """Result of running a dsprec command."""

    returncode: int
    stdout: str
    stderr: str
    command: list[str]

    @property
    def success(self) -> bool:
        """Return True if command succeeded."""
        return self.returncode == 0

    @property
    def output(self) -> str:
        """Return combined stdout and stderr."""
        return self.stdout + self.stderr


@dataclass
class DsprecRunner:
    """Runs ``python -m dsprec`` in a scratch directory."""

    workdir: Path

    def run(self, command: str, args: list[str] | None = None, *, timeout: int = 600) -> CommandResult:
        """Run a dsprec subcommand.

        Args:
            command: The dsprec subcommand (generate, run, verify, ...)
            args: Additional arguments to pass
            timeout: Command timeout in seconds

        Returns:
            CommandResult with returncode, stdout, stderr
        """
        cmd = [sys.executable, "-m", "dsprec", command, *(args or [])]
        env = os.environ.copy()
        env["PYTHONPATH"] = os.pathsep.join(filter(None, [str(SRC_DIR), env.get("PYTHONPATH")]))
        # Keep a developer's own config file out of the tests
        env["XDG_CONFIG_HOME"] = str(self.workdir / "xdg")
        env["COLUMNS"] = "200"
        result = subprocess.run(
            cmd,
            capture_output=True,
            text=True,
            env=env,
            cwd=self.workdir,
            timeout=timeout,
        )
        return CommandResult(
            returncode=result.returncode,
            stdout=result.stdout,
            stderr=result.stderr,
            command=cmd,
        )


@pytest.fixture
def dsprec(tmp_path: Path) -> DsprecRunner:
    """Command runner working inside a fresh temporary directory."""
    return DsprecRunner(workdir=tmp_path)


@pytest.fixture(autouse=True)
def isolated_config(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    """Point the user config directory at an empty location and clear DSPREC_* variables."""
    monkeypatch.setenv("XDG_CONFIG_HOME", str(tmp_path / "xdg"))
    for key in list(os.environ):
        if key.startswith("DSPREC_"):
            monkeypatch.delenv(key)


@pytest.fixture(scope="session")
def instance() -> ProblemInstance:
    """The default seed-1 instance: n=5, d=20, k=1, noiseless."""
    return generate(GenSpec())


@pytest.fixture(scope="session")
def multi_output_instance() -> ProblemInstance:
    return generate(GenSpec(n=4, d=12, k=3, seed=7))


@pytest.fixture(scope="session")
def toy_instance() -> ProblemInstance:
    """One sample, two features: x = (1, 1), y = 2, W0 = 0."""
    return ProblemInstance(
        x=np.array([[1.0, 1.0]]),
        y=np.array([[2.0]]),
        w0=np.zeros((2, 1)),
    )


@pytest.fixture(scope="session")
def squared() -> SeparableLoss:
    return SeparableLoss.squared()


@pytest.fixture(scope="session")
def log_cosh() -> SeparableLoss:
    return SeparableLoss.log_cosh()


@pytest.fixture(scope="session")
def adam():
    return make_adam_like(0.5)


@pytest.fixture(scope="session")
def ngd():
    return make_normalized_gd(0.5)


@pytest.fixture
def dense_config() -> RunConfig:
    """Default step size with every iterate recorded."""
    return RunConfig(eta=0.005, record_every=1)
