"""Command-line interface: configs, exit codes, deterministic output."""

import os

import numpy as np
import pytest

from ensemble_qsvt.cli import (
    EXIT_CONFIG,
    EXIT_CONTRACT,
    EXIT_OK,
    RunConfig,
    main,
    parse_delta_grid,
    parse_n_grid,
    parse_n_range,
)


def test_grid_parsing():
    assert parse_n_grid("1..4") == (1, 2, 3, 4)
    assert parse_n_grid("2,5,7") == (2, 5, 7)
    grid = parse_delta_grid("0.1:10:5")
    assert len(grid) == 5 and grid[0] == 0.1 and grid[-1] == 10.0
    assert np.allclose(np.diff(np.log(grid)), np.diff(np.log(grid))[0])
    assert list(parse_delta_grid("0.3,0.5")) == [0.3, 0.5]
    assert parse_n_range("100:300:100") == (100, 200, 300)
    assert parse_n_range("50") == (50,)


def test_config_round_trip():
    cfg = RunConfig(command="cost-scan", N="50", beta=0.25, eps=0.05,
                    n_grid="1..3", delta_grid="0.1:2:7", family="even_power",
                    out="x.csv", plot=True)
    text = cfg.to_text()
    again = RunConfig.from_text(text)
    assert again == cfg
    assert RunConfig.from_text(again.to_text()) == again


def test_config_rejects_unknown_key():
    with pytest.raises(ValueError):
        RunConfig.from_text("nonsense=1\n")


def test_cost_scan_small(tmp_path, capsys):
    out = tmp_path / "scan.csv"
    rc = main(["cost-scan", "--N", "20", "--beta", "0.5", "--eps", "0.1",
               "--n-grid", "1,2", "--delta-grid", "0.3:1.5:6",
               "--out", str(out)])
    assert rc == EXIT_OK
    text = out.read_text()
    lines = text.splitlines()
    assert lines[0] == ("N,beta,eps,family,n,delta,mu,d_eta,d_exp,"
                        "log10_d_AA,log10_total,log10_A,log10_B")
    assert len(lines) == 1 + 12
    printed = capsys.readouterr().out
    assert "n*=" in printed and "ratio=" in printed


def test_cost_scan_deterministic(tmp_path):
    args = ["cost-scan", "--N", "20", "--beta", "0.5", "--eps", "0.1",
            "--n-grid", "1,2", "--delta-grid", "0.3:1.5:6"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(a)]) == EXIT_OK
    assert main(args + ["--out", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_cost_scan_thread_cap_deterministic(tmp_path):
    args = ["cost-scan", "--N", "20", "--beta", "0.5", "--eps", "0.1",
            "--n-grid", "1,2", "--delta-grid", "0.3:1.5:6"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(a)]) == EXIT_OK
    os.environ["ENSEMBLE_QSVT_THREADS"] = "4"
    try:
        assert main(args + ["--out", str(b)]) == EXIT_OK
    finally:
        del os.environ["ENSEMBLE_QSVT_THREADS"]
    assert a.read_bytes() == b.read_bytes()


def test_cost_scan_canonical_family(tmp_path):
    out = tmp_path / "canon.csv"
    rc = main(["cost-scan", "--N", "20", "--beta", "0.5", "--eps", "0.1",
               "--family", "canonical", "--out", str(out)])
    assert rc == EXIT_OK
    lines = out.read_text().splitlines()
    assert len(lines) == 2
    assert lines[1].split(",")[3] == "canonical"


def test_cost_scan_empty_grid_is_config_error(capsys):
    rc = main(["cost-scan", "--N", "20", "--delta-grid", ""])
    assert rc == EXIT_CONFIG


def test_cost_curve_single_point(tmp_path):
    out = tmp_path / "curve.csv"
    rc = main(["cost-curve", "--N", "40", "--beta", "0.5", "--eps", "0.1",
               "--n-grid", "1", "--delta-grid", "0.4:0.9:4", "--out", str(out)])
    assert rc == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == "N,log10_canonical,log10_generalized,log10_optimal_scaling"
    assert len(lines) == 2


def test_prepare_exit_codes(tmp_path):
    rc = main(["prepare", "--N", "1", "--family", "canonical", "--beta", "0.0",
               "--eps", "0.1"])
    assert rc == EXIT_OK
    rc = main(["prepare", "--N", "7", "--family", "canonical", "--beta", "1.0",
               "--eps", "0.1"])
    assert rc == EXIT_CONFIG


def test_prepare_writes_diagnostics_and_state(tmp_path, capsys):
    out = tmp_path / "state.csv"
    rc = main(["prepare", "--N", "1", "--family", "canonical", "--beta", "1.0",
               "--eps", "0.2", "--out", str(out)])
    assert rc == EXIT_OK
    text = capsys.readouterr().out
    assert "mode=circuit" in text
    assert "measured_error=" in text
    assert out.read_text().startswith("index,re,im\n")


def test_approx_check(tmp_path, capsys):
    out = tmp_path / "approx.csv"
    rc = main(["approx-check", "--kind", "exp", "--count", "4", "--seed", "7",
               "--out", str(out)])
    assert rc == EXIT_OK
    assert "all bounds hold" in capsys.readouterr().out
    lines = out.read_text().splitlines()
    assert len(lines) == 5
    assert all(line.endswith(",1") for line in lines[1:])


def test_plot_rendering(tmp_path):
    out = tmp_path / "scan.csv"
    rc = main(["cost-scan", "--N", "20", "--beta", "0.5", "--eps", "0.1",
               "--n-grid", "1", "--delta-grid", "0.4:1.2:4",
               "--out", str(out), "--plot"])
    assert rc == EXIT_OK
    png = tmp_path / "scan.png"
    assert png.exists() and png.stat().st_size > 1000


def test_config_file_with_overrides(tmp_path, capsys):
    cfg_path = tmp_path / "run.cfg"
    cfg_path.write_text("beta=0.5\neps=0.1\nn_grid=1\ndelta_grid=0.4:0.9:3\nN=20\n")
    rc = main(["cost-scan", "--config", str(cfg_path), "--N", "15"])
    assert rc == EXIT_OK
    assert "n*=" in capsys.readouterr().out
