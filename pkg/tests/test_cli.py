"""CLI subcommands: artifacts, formats, exit codes, determinism."""

import csv
import json
import os
import re

import pytest

from wicm import cli

FLOAT_RE = re.compile(r"^-?\d\.\d{15}e[+-]\d{2,3}$")


def _read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def _read_json(path):
    with open(path) as fh:
        return json.load(fh)


def test_tables_command(tmp_path):
    code = cli.main(["tables", "--out", str(tmp_path)])
    assert code == 0
    rows = _read_csv(tmp_path / "tables.csv")
    assert len(rows) == 17
    assert [k for k in rows[0]] == ["k", "phi_int_1", "phi_int_2",
                                    "phi_int_3", "phi_int_4"]
    last = rows[-1]
    assert float(last["k"]) == 17
    assert float(last["phi_int_1"]) == pytest.approx(1.0, abs=1e-12)
    first = rows[0]
    assert float(first["phi_int_4"]) == pytest.approx(-4.830484119726849e-13,
                                                      rel=1e-9)
    # fixed float formatting
    assert FLOAT_RE.match(last["phi_int_1"])
    report = _read_json(tmp_path / "tables_report.json")
    assert report["schema"] == "wicm-report/1"
    assert report["within_tolerance"] is True
    assert float(report["max_rel_deviation"]) <= 1e-9
    assert (tmp_path / "tables.png").exists()
    assert (tmp_path / "tables_diff.csv").exists()


def test_solve_geng(tmp_path):
    code = cli.main(["solve", "geng", "--level", "4",
                     "--out", str(tmp_path)])
    assert code == 0
    report = _read_json(tmp_path / "geng_report.json")
    assert report["converged"] is True
    assert float(report["max_abs_error"]) <= 1e-13
    rows = _read_csv(tmp_path / "geng_solution.csv")
    assert list(rows[0]) == ["x", "y_0", "y_1", "y_2", "y_3", "y_4"]
    assert len(rows) == 17
    assert (tmp_path / "geng_solution.png").exists()


def test_solve_bratu_probe_populated(tmp_path):
    code = cli.main(["solve", "bratu", "--level", "4",
                     "--param", "lambda=1", "--out", str(tmp_path)])
    assert code == 0
    report = _read_json(tmp_path / "bratu_report.json")
    assert report["error_at_probe"] is not None
    assert float(report["probe"]) == 0.5


def test_solve_plate_zero_load(tmp_path):
    code = cli.main(["solve", "plate", "--level", "4",
                     "--param", "Q=0", "--out", str(tmp_path)])
    assert code == 0
    rows = _read_csv(tmp_path / "plate_solution.csv")
    for row in rows:
        for key, value in row.items():
            if key != "x":
                assert float(value) == 0.0


def test_solve_2d_csv_layout(tmp_path):
    code = cli.main(["solve", "bratu2d", "--level", "4",
                     "--param", "lambda=1", "--out", str(tmp_path)])
    assert code == 0
    rows = _read_csv(tmp_path / "bratu2d_solution.csv")
    assert list(rows[0]) == ["x", "y", "u"]
    assert len(rows) == 17 * 17


def test_solve_unknown_problem(tmp_path):
    assert cli.main(["solve", "nosuch", "--level", "4",
                     "--out", str(tmp_path)]) == 3


def test_solve_study_only_problem(tmp_path):
    assert cli.main(["solve", "integral-sin", "--level", "4",
                     "--out", str(tmp_path)]) == 3


def test_solve_bad_param(tmp_path):
    assert cli.main(["solve", "bratu", "--level", "4", "--param", "zeta=1",
                     "--out", str(tmp_path)]) == 3
    assert cli.main(["solve", "bratu", "--level", "4", "--param", "lambda=x",
                     "--out", str(tmp_path)]) == 3


def test_solve_level_too_small(tmp_path):
    assert cli.main(["solve", "bratu", "--level", "3",
                     "--out", str(tmp_path)]) == 3


def test_solve_nonconvergence_writes_report(tmp_path):
    code = cli.main(["solve", "bratu", "--level", "4",
                     "--param", "lambda=4", "--out", str(tmp_path)])
    assert code == 2
    report = _read_json(tmp_path / "bratu_report.json")
    assert report["converged"] is False


def test_convergence_bratu(tmp_path):
    code = cli.main(["convergence", "bratu", "--levels", "4..6",
                     "--probe", "0.5", "--param", "lambda=1",
                     "--out", str(tmp_path)])
    assert code == 0
    report = _read_json(tmp_path / "bratu_convergence.json")
    assert float(report["fitted_rate"]) >= 6.5
    rows = _read_csv(tmp_path / "bratu_convergence.csv")
    assert list(rows[0]) == ["j", "m", "error"]
    assert [int(float(r["j"])) for r in rows] == [4, 5, 6]
    assert (tmp_path / "bratu_convergence.png").exists()


def test_convergence_integral_sin(tmp_path):
    code = cli.main(["convergence", "integral-sin", "--levels", "3..7",
                     "--out", str(tmp_path)])
    assert code == 0
    report = _read_json(tmp_path / "integral-sin_convergence.json")
    assert report["skipped_levels"] == [3]
    rate = float(report["fitted_rate"])
    assert 6.5 <= rate <= 8.5


def test_convergence_all_levels_floored(tmp_path, capsys):
    # every geng level is already at machine precision: no rate is fittable
    code = cli.main(["convergence", "geng", "--levels", "4..6",
                     "--out", str(tmp_path)])
    assert code == 2
    err = capsys.readouterr().err
    assert "machine-precision floor" in err


def test_convergence_bad_levels(tmp_path):
    assert cli.main(["convergence", "bratu", "--levels", "6..4",
                     "--out", str(tmp_path)]) == 3
    assert cli.main(["convergence", "bratu", "--levels", "abc",
                     "--out", str(tmp_path)]) == 3


def test_condition_reference_alpha(tmp_path):
    code = cli.main(["condition", "--alpha", "0,0,0,0,1",
                     "--levels", "4..5", "--out", str(tmp_path)])
    assert code == 0
    report = _read_json(tmp_path / "condition_report.json")
    assert float(report["cond_2"][0]) == pytest.approx(1.213117058771,
                                                       abs=1e-9)
    assert float(report["inv_norm_2"][0]) == pytest.approx(1.171279210341,
                                                           abs=1e-9)
    assert float(report["cond_2"][1]) == pytest.approx(1.208988638091,
                                                       abs=1e-9)
    assert float(report["inv_norm_2"][1]) == pytest.approx(1.169415507325,
                                                           abs=1e-9)


def test_condition_bad_alpha(tmp_path):
    assert cli.main(["condition", "--alpha", "1,1,1,1",
                     "--levels", "4..5", "--out", str(tmp_path)]) == 3
    assert cli.main(["condition", "--alpha", "1,1,1,1,0",
                     "--levels", "4..5", "--out", str(tmp_path)]) == 3


def test_deterministic_output(tmp_path, monkeypatch):
    monkeypatch.setenv("WICM_NO_TIMING", "1")
    a = tmp_path / "a"
    b = tmp_path / "b"
    for out in (a, b):
        assert cli.main(["solve", "bratu", "--level", "4",
                         "--param", "lambda=1", "--out", str(out)]) == 0
    for name in ("bratu_solution.csv", "bratu_report.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_threaded_study_matches_serial(tmp_path, monkeypatch):
    monkeypatch.setenv("WICM_NO_TIMING", "1")
    serial = tmp_path / "serial"
    monkeypatch.setenv("WICM_THREADS", "1")
    assert cli.main(["convergence", "five-point", "--levels", "4..6",
                     "--out", str(serial)]) == 0
    threaded = tmp_path / "threaded"
    monkeypatch.setenv("WICM_THREADS", "3")
    assert cli.main(["convergence", "five-point", "--levels", "4..6",
                     "--out", str(threaded)]) == 0
    assert (serial / "five-point_convergence.csv").read_bytes() == \
           (threaded / "five-point_convergence.csv").read_bytes()


def test_missing_subcommand_is_bad_args():
    assert cli.main([]) == 3
