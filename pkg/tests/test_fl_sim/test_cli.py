"""
Tests for the command-line entry point.
"""

import json
import logging

import numpy as np
import pytest

from src.fl_sim.cli import build_parser, main

from .helpers import CONFIG_DIR


@pytest.fixture(autouse=True)
def fast_settings(monkeypatch):
    monkeypatch.setenv("FLSIM_DIAGNOSTICS", "false")
    monkeypatch.setenv("FLSIM_DIAGNOSTIC_PROBES", "1")


def output_json(capsys):
    return json.loads(capsys.readouterr().out)


class TestProject:
    """One-shot projection tool."""

    def test_raw_projection(self, capsys):
        assert main(["project", "--g0", "1,0", "--gk=-1,1"]) == 0
        out = output_json(capsys)
        assert out["g_opt"] == [0.0, 1.0]
        assert (out["alpha"], out["beta"], out["theta"]) == (1.0, -1.0, -1.0)
        assert out["branch"] == "corrected"

    def test_negative_value_after_option(self, capsys):
        assert main(["project", "--g0", "1,0", "--gk", "-1,1"]) == 0
        assert output_json(capsys)["g_opt"] == [0.0, 1.0]

    def test_default_reports_applied_subtraction(self, capsys):
        assert main(["project", "--g0", "1,0", "--gk", "1,1"]) == 0
        out = output_json(capsys)
        assert out["g_opt"] == [0.0, 1.0]
        assert out["branch"] == "corrected"

    def test_strict_branch_keeps_feasible_gradient(self, capsys):
        assert main(["project", "--g0", "1,0", "--gk", "1,1", "--strict-branch"]) == 0
        out = output_json(capsys)
        assert out["g_opt"] == [1.0, 1.0]
        assert out["branch"] == "identity"

    def test_normalized_projection(self, capsys):
        assert main(["project", "--g0", "1,0", "--gk=-1,1", "--normalize"]) == 0
        out = output_json(capsys)
        assert out["g_opt"][0] == pytest.approx(0.0, abs=1e-15)
        assert out["g_opt"][1] == pytest.approx(0.5 + 2 ** 0.5 / 4, rel=1e-12)

    def test_csv_file_input(self, capsys, tmp_path):
        g0 = tmp_path / "g0.csv"
        gk = tmp_path / "gk.csv"
        g0.write_text("1,0\n0,1\n")
        gk.write_text("-3,0\n0,1\n")
        assert main(["project", "--g0", str(g0), "--gk", str(gk)]) == 0
        assert output_json(capsys)["g_opt"] == [[-2.0, 0.0], [0.0, 2.0]]

    def test_zero_anchor_fails(self, capsys):
        assert main(["project", "--g0", "0,0", "--gk", "1,1"]) == 1

    def test_unparseable_input_fails(self):
        assert main(["project", "--g0", "a,b", "--gk", "1,1"]) == 1


class TestCka:

    def test_identical_features(self, capsys):
        assert main(["cka", "--features-a", "1,2;3,4;5,7", "--features-b", "1,2;3,4;5,7"]) == 0
        assert output_json(capsys)["cka"] == pytest.approx(1.0, abs=1e-12)

    def test_single_column_files(self, capsys, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        a.write_text("1\n2\n3\n4\n")
        b.write_text("2\n4\n6\n9\n")
        assert main(["cka", "--features-a", str(a), "--features-b", str(b)]) == 0
        xc = np.array([-1.5, -0.5, 0.5, 1.5])
        yc = np.array([2.0, 4.0, 6.0, 9.0]) - 5.25
        expected = (xc @ yc) ** 2 / ((xc @ xc) * (yc @ yc))
        assert output_json(capsys)["cka"] == pytest.approx(expected, rel=1e-12)

    def test_non_finite_input_fails(self, tmp_path):
        a = tmp_path / "a.csv"
        a.write_text("1\nnan\n3\n")
        assert main(["cka", "--features-a", str(a), "--features-b", "1;2;3"]) == 1

    def test_row_mismatch_fails(self):
        assert main(["cka", "--features-a", "1;2;3", "--features-b", "1;2"]) == 1


class TestExperimentCommands:

    def test_run(self, capsys, tmp_path):
        assert main(["run", "--config", str(CONFIG_DIR / "smoke.toml"), "--out", str(tmp_path)]) == 0
        out = output_json(capsys)
        assert out["final"]["round"] == 3
        assert (tmp_path / "inco_seed0.csv").is_file()

    def test_missing_config(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "absent.toml")]) == 1

    def test_compare(self, capsys, tmp_path):
        argv = [
            "compare", "--config", str(CONFIG_DIR / "smoke.toml"),
            "--variants", "hetero_avg,inco_wo_opt", "--seeds", "0", "--out", str(tmp_path),
        ]
        assert main(argv) == 0
        assert [row["method"] for row in output_json(capsys)] == ["hetero_avg", "inco_wo_opt"]
        assert (tmp_path / "comparison.csv").is_file()

    def test_estimate_constants(self, capsys):
        assert main(["estimate-constants", "--config", str(CONFIG_DIR / "smoke.toml")]) == 0
        out = output_json(capsys)
        assert set(out["estimate"]) == {"L", "sigma2", "rho", "gamma"}
        assert out["estimate"]["L"] > 0.0
        assert out["learning_rate"] == 0.05

    def test_subcommand_required(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args([])


class TestLogLevel:

    @pytest.fixture(autouse=True)
    def restore_root_level(self):
        root = logging.getLogger()
        level = root.level
        yield
        root.setLevel(level)

    @pytest.mark.parametrize("level", ["WARNING", "DEBUG"])
    def test_environment_sets_root_level(self, monkeypatch, capsys, level):
        monkeypatch.setenv("FLSIM_LOG_LEVEL", level)
        assert main(["project", "--g0", "1,0", "--gk=-1,1"]) == 0
        assert logging.getLogger().level == getattr(logging, level)
