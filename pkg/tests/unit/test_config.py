"""Unit tests for dsprec.config module."""

from __future__ import annotations

from pathlib import Path

import pytest

from dsprec.config import (
    DEFAULT_EPS_GRID,
    DEFAULT_ETA_GRID,
    ExperimentConfig,
    SweepSection,
    get_config_paths,
)
from dsprec.reference import NormKind
from dsprec.utils.exceptions import ConfigError, UnsupportedError

pytestmark = [pytest.mark.fast, pytest.mark.cli]


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


class TestDefaults:
    """Tests for the built-in defaults."""

    def test_values(self):
        config = ExperimentConfig.load()
        assert (config.problem.n, config.problem.d, config.problem.k) == (5, 20, 1)
        assert config.preconditioner.name == "adam_like"
        assert config.preconditioner.eps == 0.5
        assert config.loss.kind == "squared"
        assert config.run.eta == 0.005
        assert config.references == ["L1", "L2", "Linf", "GD"]
        assert config.output_dir == Path("results")

    def test_reference_views(self):
        config = ExperimentConfig.load()
        assert config.norm_references == [NormKind.L1, NormKind.L2, NormKind.LINF]
        assert config.wants_gd

    def test_no_user_config(self):
        assert get_config_paths() == []

    def test_package_exports(self):
        import dsprec

        assert dsprec.__all__ == ["main", "VERSION"]
        assert dsprec.__version__ == dsprec.VERSION
        assert not hasattr(dsprec, "COMMAND_NAME")


class TestFileLayers:
    """Tests for the user config file and the explicit --config file."""

    def test_explicit_file(self, tmp_path):
        path = _write(
            tmp_path / "exp.toml",
            '[problem]\nn = 4\nd = 30\n\n[preconditioner]\nname = "grad_clip"\neps = 2.0\n\n'
            "[run]\neta = 0.01\nmax_iters = 500\n",
        )
        config = ExperimentConfig.load(path)
        assert (config.problem.n, config.problem.d) == (4, 30)
        assert config.preconditioner.build().label == "grad_clip(eps=2)"
        assert (config.run.eta, config.run.max_iters) == (0.01, 500)

    def test_explicit_file_overrides_user_file(self, tmp_path):
        _write(tmp_path / "xdg" / "dsprec" / "config.toml", "[problem]\nseed = 3\nn = 6\nd = 40\n")
        path = _write(tmp_path / "exp.toml", "[problem]\nseed = 9\n")
        config = ExperimentConfig.load(path)
        assert config.problem.seed == 9
        assert (config.problem.n, config.problem.d) == (6, 40)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            ExperimentConfig.load(tmp_path / "nope.toml")

    def test_invalid_toml(self, tmp_path):
        with pytest.raises(ConfigError):
            ExperimentConfig.load(_write(tmp_path / "bad.toml", "[problem\n"))

    @pytest.mark.parametrize(
        "text",
        [
            "colour = 1\n",
            "[problem]\nwidth = 3\n",
            "problem = 3\n",
            '[run]\neta = "fast"\n',
            "[run]\neta = -1.0\n",
            "[problem]\nd = 3\n",
            '[preconditioner]\nname = "sign"\n',
            '[loss]\nkind = "hinge"\n',
        ],
    )
    def test_rejects(self, tmp_path, text):
        with pytest.raises(ConfigError):
            ExperimentConfig.load(_write(tmp_path / "bad.toml", text))

    def test_unknown_reference_norm(self, tmp_path):
        with pytest.raises(UnsupportedError):
            ExperimentConfig.load(_write(tmp_path / "bad.toml", 'references = ["L3"]\n'))

    def test_instance_path_relative_to_file(self, tmp_path):
        _write(tmp_path / "conf" / "instance.txt", "")
        config = ExperimentConfig.load(_write(tmp_path / "conf" / "exp.toml", '[problem]\npath = "instance.txt"\n'))
        assert config.problem.path == tmp_path / "conf" / "instance.txt"

    def test_missing_instance_path(self, tmp_path):
        with pytest.raises(ConfigError):
            ExperimentConfig.load(_write(tmp_path / "exp.toml", '[problem]\npath = "missing.txt"\n'))


class TestEnvironment:
    def test_env_overrides_file(self, tmp_path, monkeypatch):
        path = _write(tmp_path / "exp.toml", "[problem]\nseed = 9\n")
        monkeypatch.setenv("DSPREC_SEED", "11")
        monkeypatch.setenv("DSPREC_STRICT_ETA", "yes")
        monkeypatch.setenv("DSPREC_OUTPUT_DIR", "out")
        config = ExperimentConfig.load(path)
        assert config.problem.seed == 11
        assert config.run.strict_eta
        assert config.output_dir == Path("out")

    def test_bad_env_value(self, monkeypatch):
        monkeypatch.setenv("DSPREC_JOBS", "many")
        with pytest.raises(ConfigError):
            ExperimentConfig.load()


class TestSweep:
    """Tests for sweep grids."""

    def test_default_grids(self):
        sweep = SweepSection()
        assert sweep.grid("eps") == list(DEFAULT_EPS_GRID)
        assert sweep.grid("eta") == list(DEFAULT_ETA_GRID)

    def test_values_apply_to_their_parameter(self):
        sweep = SweepSection(parameter="eps", values=[0.3, 0.6])
        assert sweep.grid("eps") == [0.3, 0.6]
        assert sweep.grid("eta") == list(DEFAULT_ETA_GRID)

    @pytest.mark.parametrize(
        "text",
        [
            '[sweep]\nparameter = "lr"\n',
            "[sweep]\nvalues = [0.1, -0.2]\n",
            "[sweep]\nvalues = [0.2, 0.1]\n",
            "[sweep]\nvalues = [0.1, 0.1]\n",
        ],
    )
    def test_rejects(self, tmp_path, text):
        with pytest.raises(ConfigError):
            ExperimentConfig.load(_write(tmp_path / "bad.toml", text))


class TestOverrides:
    """Tests for command-line overrides."""

    def test_flags_win(self, monkeypatch):
        monkeypatch.setenv("DSPREC_SEED", "11")
        config = ExperimentConfig.load().apply_overrides(out=Path("o"), seed=4, strict_eta=True, jobs=2, verbose=True)
        assert config.output_dir == Path("o")
        assert config.problem.seed == 4
        assert config.run.strict_eta
        assert config.jobs == 2
        assert config.verbose

    def test_unset_flags_keep_values(self):
        config = ExperimentConfig.load()
        before = config.echo()
        config.apply_overrides()
        assert config.echo() == before

    def test_rejects_zero_jobs(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.load().apply_overrides(jobs=0)

    def test_echo_is_plain_data(self):
        echo = ExperimentConfig.load().echo()
        assert echo["run"]["eta"] == 0.005
        assert echo["problem"]["path"] is None
        assert echo["sweep"] == {"parameter": None, "values": []}
