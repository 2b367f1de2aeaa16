"""End-to-end CLI tests, run in process through cli.main."""

import numpy as np
import pytest

from itnopt import GradCheckReport, NonFinite, RunManifest
from itnopt.cli import (
    EXIT_CONFIG,
    EXIT_IO,
    EXIT_NOT_CONVERGED,
    EXIT_OK,
    main,
)


def test_solve_happy_path(tmp_path, capsys):
    rc = main(["solve", "--grid", "300", "--out", str(tmp_path)])
    assert rc == EXIT_OK
    out = capsys.readouterr().out
    assert "converged=True" in out
    assert (tmp_path / "solve_b0.75_j1_decoupled_manifest.json").exists()
    assert (tmp_path / "solve_b0.75_j1_decoupled_trajectory.csv").exists()


def test_simulate_happy_path(tmp_path, capsys):
    rc = main(["simulate", "--grid", "300", "--out", str(tmp_path)])
    assert rc == EXIT_OK
    assert "iterations=0" in capsys.readouterr().out
    assert (tmp_path / "simulate_b0.75_j1_trajectory.csv").exists()


def test_dedicated_flags_outrank_set(tmp_path):
    rc = main(["solve", "--grid", "200", "--out", str(tmp_path),
               "--set", "b=0.3", "--b", "0.5"])
    assert rc == EXIT_OK
    assert (tmp_path / "solve_b0.5_j1_decoupled_manifest.json").exists()


def test_adjoint_flag_selects_mode(tmp_path):
    rc = main(["solve", "--grid", "200", "--out", str(tmp_path),
               "--adjoint", "exact", "--cost", "j2"])
    assert rc == EXIT_OK
    assert (tmp_path / "solve_b0.75_j2_exact_manifest.json").exists()


def test_out_of_range_flag_is_config_error(tmp_path, capsys):
    rc = main(["solve", "--grid", "200", "--out", str(tmp_path), "--b", "1.7"])
    assert rc == EXIT_CONFIG
    assert "configuration error" in capsys.readouterr().err


def test_missing_config_file(tmp_path, capsys):
    rc = main(["solve", "--config", str(tmp_path / "absent.cfg")])
    assert rc == EXIT_CONFIG
    assert "not found" in capsys.readouterr().err


def test_malformed_set_flag(tmp_path, capsys):
    rc = main(["solve", "--set", "grid300", "--out", str(tmp_path)])
    assert rc == EXIT_CONFIG
    assert "KEY=VALUE" in capsys.readouterr().err


def test_unknown_set_key(tmp_path, capsys):
    rc = main(["solve", "--set", "bb=0.5", "--out", str(tmp_path)])
    assert rc == EXIT_CONFIG
    assert "bb" in capsys.readouterr().err


def test_sweep_two_members(tmp_path, capsys):
    rc = main(["sweep", "--grid", "250", "--out", str(tmp_path),
               "--set", "sweep_b=0.25,0.5"])
    assert rc == EXIT_OK
    out = capsys.readouterr().out
    assert "b=0.25" in out and "b=0.5" in out
    assert (tmp_path / "sweep_j1_comparison.csv").exists()


def test_sweep_defaults_to_standard_levels(tmp_path, capsys, monkeypatch):
    import itnopt.cli as cli

    seen = {}

    def fake_run_sweep(cfg):
        seen["levels"] = cfg.sweep_b
        return []

    monkeypatch.setattr(cli, "run_sweep", fake_run_sweep)
    rc = main(["sweep", "--grid", "250", "--out", str(tmp_path)])
    assert seen["levels"] == (0.25, 0.3, 0.4, 0.5, 0.6, 0.7, 0.75)
    assert rc == EXIT_NOT_CONVERGED
    assert "7 of 7 sweep members failed" in capsys.readouterr().err


def test_sweep_member_failure_exit_code(tmp_path, capsys, monkeypatch):
    import itnopt.scenarios as scen

    original = scen.run_scenario

    def flaky(cfg, scenario=None):
        if cfg.params.b == 0.5:
            raise NonFinite("boom")
        return original(cfg, scenario)

    monkeypatch.setattr(scen, "run_scenario", flaky)
    rc = main(["sweep", "--grid", "250", "--out", str(tmp_path),
               "--set", "sweep_b=0.25,0.5"])
    assert rc == EXIT_NOT_CONVERGED
    assert "1 of 2 sweep members failed" in capsys.readouterr().err


def test_compare_costs_command(tmp_path, capsys):
    rc = main(["compare-costs", "--grid", "250", "--out", str(tmp_path)])
    assert rc == EXIT_OK
    out = capsys.readouterr().out
    assert "host-only" in out and "host+vector" in out
    assert (tmp_path / "compare_b0.75_control.svg").exists()


def test_solve_nonconvergence_exit_code(tmp_path, capsys, monkeypatch):
    import itnopt.cli as cli

    stuck = RunManifest(
        resolved_config={"b": "0.75"}, cost_value=1.0, iterations=500,
        converged=False, residuals=(1.0,), duration_seconds=0.1,
        artifacts=(), tool_version="itnopt test")
    monkeypatch.setattr(cli, "run_scenario", lambda cfg: stuck)
    rc = main(["solve", "--grid", "200", "--out", str(tmp_path)])
    assert rc == EXIT_NOT_CONVERGED
    assert "did not converge" in capsys.readouterr().err


def test_verify_passes(tmp_path, capsys):
    rc = main(["verify", "--grid", "500"])
    assert rc == EXIT_OK
    out = capsys.readouterr().out
    assert "gradient check" in out
    assert "cross-validation" in out
    assert "verify: PASS" in out


def test_verify_fails_on_bad_gradient(capsys, monkeypatch):
    import itnopt.cli as cli

    bogus = GradCheckReport(20, 0.5, np.full(20, 0.5))
    monkeypatch.setattr(cli, "finite_difference_gradient_check",
                        lambda *a, **k: bogus)
    rc = main(["verify", "--grid", "200"])
    assert rc == EXIT_NOT_CONVERGED
    err = capsys.readouterr().err
    assert "max relative error" in err
    assert "95%" in err


def test_output_path_collision_is_io_error(tmp_path, capsys):
    target = tmp_path / "blocked"
    target.write_text("a file, not a directory\n")
    rc = main(["simulate", "--grid", "200", "--out", str(target)])
    assert rc == EXIT_IO
    assert "io error" in capsys.readouterr().err
