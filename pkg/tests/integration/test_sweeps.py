"""Integration tests for the sweep commands."""

from __future__ import annotations

import json

import pytest

from dsprec.utils.io import CSV_COLUMNS, ETA_COLUMNS, read_csv
from tests.helpers.assertions import assert_command_failed, assert_command_success, assert_output_contains

pytestmark = [pytest.mark.integration, pytest.mark.cli]


class TestSweepEps:
    """Tests for dsprec sweep-eps."""

    def test_outputs(self, dsprec, tmp_path):
        result = dsprec.run("sweep-eps", ["--values", "0.5", "2", "-j", "2"])
        assert_command_success(result)
        out = tmp_path / "results"
        assert_output_contains(result, "sweep_eps.csv")

        text = (out / "sweep_eps.csv").read_text()
        assert text.splitlines()[0] == ",".join(CSV_COLUMNS)
        rows = read_csv(text)
        assert [r["value"] for r in rows] == ["0.5", "2"]
        assert all(r["param"] == "eps" and r["converged"] == "true" for r in rows)
        assert all(r["dist_gd"] for r in rows)

        assert (out / "sweep_eps.svg").read_text().lstrip().startswith("<?xml")
        manifest = json.loads((out / "sweep_eps.json").read_text())
        assert manifest["command"] == "sweep-eps"
        assert [run["value"] for run in manifest["runs"]] == [0.5, 2.0]
        assert set(manifest["references"]) == {"L1", "L2", "Linf"}

    def test_reruns_are_byte_identical(self, dsprec, tmp_path):
        for out in ("a", "b"):
            args = ["--values", "0.5", "2", "-o", out, "-j", "1" if out == "a" else "2"]
            assert_command_success(dsprec.run("sweep-eps", args))
        for name in ("sweep_eps.csv", "sweep_eps.svg"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_references_from_config(self, dsprec, tmp_path, config_file):
        path = config_file('references = ["L2"]\n\n[sweep]\nparameter = "eps"\nvalues = [1.0]\n')
        assert_command_success(dsprec.run("sweep-eps", ["-c", str(path)]))
        row = read_csv((tmp_path / "results" / "sweep_eps.csv").read_text())[0]
        assert row["dist_l2"]
        assert row["dist_l1"] == row["dist_linf"] == row["dist_gd"] == ""

    def test_rejects_decreasing_grid(self, dsprec):
        assert_command_failed(dsprec.run("sweep-eps", ["--values", "2", "1"]), expected_code=2)


class TestSweepEta:
    """Tests for dsprec sweep-eta."""

    def test_reference_row(self, dsprec, tmp_path):
        assert_command_success(dsprec.run("sweep-eta", ["--values", "0.005", "0.02"]))
        text = (tmp_path / "results" / "sweep_eta.csv").read_text()
        assert text.splitlines()[0] == ",".join(CSV_COLUMNS + ETA_COLUMNS)
        first, second = read_csv(text)
        assert first["dist_ref"] == "0"
        assert float(first["ref_norm"]) > 0
        assert first["ref_norm"] == second["ref_norm"]
        assert float(second["dist_ref"]) > 0
        svg = (tmp_path / "results" / "sweep_eta.svg").read_text()
        assert "W_ref at eta=0.005" in svg

    def test_strict_eta_rejects_large_steps(self, dsprec):
        result = dsprec.run("sweep-eta", ["--values", "0.005", "10", "--strict-eta"])
        assert_command_failed(result, expected_code=2)
