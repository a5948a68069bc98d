"""Command line behavior: generation, solving, reports, parameter plumbing."""

import numpy as np
import pytest

from qmstbound.cli import CSV_COLUMNS, _fmt_bound, _solve_row, main
from qmstbound.graph import Graph
from qmstbound.instances import Instance, read_instance, write_instance
from qmstbound.solver import BoundResult


def _write_k4(path, q=None, ub=None):
    q = np.ones((6, 6)) if q is None else q
    write_instance(Instance(graph=Graph.complete(4), q=q, ub=ub), path)
    return str(path)


def _header_and_rows(out):
    lines = [ln for ln in out.strip().splitlines() if ln]
    return lines[0], lines[1:]


# ---------------------------------------------------------------- generate

def test_generate_then_solve_round_trip(tmp_path, capsys):
    path = tmp_path / "cp1.dat"
    rc = main(["generate", "--family", "CP1", "--n", "6", "--d", "100",
               "--seed", "3", "--out", str(path)])
    assert rc == 0
    msg = capsys.readouterr().out
    assert f"wrote {path}" in msg
    assert "CP1" in msg and "n=6" in msg and "d=100" in msg and "seed=3" in msg
    inst = read_instance(str(path))
    assert inst.n == 6 and inst.m == 15

    rc = main(["solve", str(path), "--max-total-iters", "40"])
    assert rc == 0
    cap = capsys.readouterr()
    header, rows = _header_and_rows(cap.out)
    assert header == ",".join(CSV_COLUMNS)
    assert len(rows) == 1
    assert rows[0].startswith("6,100,15,")
    assert "termination:" in cap.err


def test_generate_rejects_op_density(tmp_path, capsys):
    rc = main(["generate", "--family", "OPsym", "--n", "6", "--d", "67",
               "--out", str(tmp_path / "x.dat")])
    assert rc == 2
    assert "error:" in capsys.readouterr().err
    assert not (tmp_path / "x.dat").exists()


def test_generate_rejects_unknown_density(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["generate", "--family", "CP1", "--n", "6", "--d", "50",
              "--out", str(tmp_path / "x.dat")])
    assert exc.value.code == 2


def test_generate_sv_cost_caps(tmp_path, capsys):
    path = tmp_path / "sv.dat"
    rc = main(["generate", "--family", "SV", "--n", "8", "--seed", "1",
               "--cmax-diag", "50", "--cmax-off", "200", "--out", str(path)])
    assert rc == 0
    capsys.readouterr()
    q = read_instance(str(path)).q
    assert np.diagonal(q).max() <= 0.2 * 50 + 1e-9
    offmax = (q - np.diag(np.diagonal(q))).max()
    assert offmax <= 200.0 + 1e-9


# ------------------------------------------------------------------- solve

def test_solve_with_upper_bound_reports_gaps(tmp_path, capsys):
    path = _write_k4(tmp_path / "k4.dat")
    rc = main(["solve", path, "--ub", "9"])
    assert rc == 0
    _, rows = _header_and_rows(capsys.readouterr().out)
    row = dict(zip(CSV_COLUMNS, rows[0].split(",")))
    assert row["UB"] == "9"
    assert 0.0 <= float(row["gap_cuts"]) <= 0.6
    assert float(row["gap_dnn"]) >= float(row["gap_cuts"]) - 1e-9
    assert row["closed"] != ""


def test_solve_flag_overrides_file_ub(tmp_path, capsys):
    path = _write_k4(tmp_path / "k4.dat", ub=11.0)
    rc = main(["solve", path, "--ub", "9.5", "--max-total-iters", "10"])
    assert rc == 0
    _, rows = _header_and_rows(capsys.readouterr().out)
    assert rows[0].split(",")[3] == "9.5"


def test_solve_no_cuts_stops_after_one_round(tmp_path, capsys):
    path = _write_k4(tmp_path / "k4.dat")
    rc = main(["solve", path, "--no-cuts"])
    assert rc == 0
    cap = capsys.readouterr()
    row = dict(zip(CSV_COLUMNS, _header_and_rows(cap.out)[1][0].split(",")))
    assert row["cuts"] == "0"
    assert row["LB_CUTS"] == row["LB_DNN"]
    assert cap.err.count("round ") == 1


def test_solve_csv_appends_single_header(tmp_path, capsys):
    path = _write_k4(tmp_path / "k4.dat")
    out = tmp_path / "results.csv"
    for _ in range(2):
        assert main(["solve", path, "--csv", str(out),
                     "--max-total-iters", "5"]) == 0
    capsys.readouterr()
    lines = out.read_text().strip().splitlines()
    assert len(lines) == 3
    assert lines[0] == ",".join(CSV_COLUMNS)
    # identical runs: rows agree outside the timing columns
    assert lines[1].split(",")[:6] == lines[2].split(",")[:6]


def test_solve_missing_file_exits_two(tmp_path, capsys):
    rc = main(["solve", str(tmp_path / "absent.dat")])
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_solve_invalid_params_exit_one(tmp_path, capsys):
    path = _write_k4(tmp_path / "k4.dat")
    rc = main(["solve", path, "--gamma1", "1.5"])
    assert rc == 1
    assert "gamma1" in capsys.readouterr().err


def test_solve_parse_error_is_argparse_exit(tmp_path):
    path = _write_k4(tmp_path / "k4.dat")
    with pytest.raises(SystemExit) as exc:
        main(["solve", path, "--gamma1", "abc"])
    assert exc.value.code == 2


def test_env_parameter_fallback_and_flag_priority(tmp_path, capsys, monkeypatch):
    path = _write_k4(tmp_path / "k4.dat")
    monkeypatch.setenv("QMST_MAX_TOTAL_ITERS", "2")
    assert main(["solve", path]) == 0
    row = dict(zip(CSV_COLUMNS,
                   _header_and_rows(capsys.readouterr().out)[1][0].split(",")))
    assert row["iterations"] == "2"
    # explicit flag beats the environment
    assert main(["solve", path, "--max-total-iters", "4"]) == 0
    row = dict(zip(CSV_COLUMNS,
                   _header_and_rows(capsys.readouterr().out)[1][0].split(",")))
    assert row["iterations"] == "4"


def test_env_parameter_bad_value(tmp_path, monkeypatch):
    path = _write_k4(tmp_path / "k4.dat")
    monkeypatch.setenv("QMST_MAX_TOTAL_ITERS", "many")
    with pytest.raises(SystemExit, match="QMST_MAX_TOTAL_ITERS"):
        main(["solve", path])


def test_solve_rows_deterministic(tmp_path, capsys):
    path = _write_k4(tmp_path / "k4.dat", ub=9.0)
    assert main(["solve", path]) == 0
    a = _header_and_rows(capsys.readouterr().out)[1][0].split(",")
    assert main(["solve", path]) == 0
    b = _header_and_rows(capsys.readouterr().out)[1][0].split(",")
    timing = {CSV_COLUMNS.index("time_dnn"), CSV_COLUMNS.index("time_total")}
    for k, (va, vb) in enumerate(zip(a, b)):
        if k not in timing:
            assert va == vb, CSV_COLUMNS[k]


# --------------------------------------------------------------- solve_row

def _result(lb_dnn, lb_cuts, iterations=7, cuts=2):
    return BoundResult(lb_dnn=lb_dnn, time_dnn=0.51, lb_cuts=lb_cuts,
                       time_total=1.25, iterations=iterations, cuts_added=cuts,
                       outer_log=(), termination_reason="outer_cap")


def test_solve_row_without_ub_blanks_gap_columns():
    g = Graph(8, Graph.complete(8).edges[:19])
    inst = Instance(graph=g, q=np.eye(19))
    row = _solve_row(inst, _result(187.6184076, 192.8474088))
    assert row["n"] == 8 and row["m"] == 19
    assert row["d"] == 68  # round(200 * 19 / 56)
    assert row["UB"] == "" and row["gap_dnn"] == "" and row["closed"] == ""
    assert row["LB_DNN"] == "187.6184076"
    assert row["time_dnn"] == "0.51"


def test_solve_row_with_ub():
    inst = Instance(graph=Graph.complete(4), q=np.ones((6, 6)), ub=10.0)
    row = _solve_row(inst, _result(8.0, 9.0))
    assert row["gap_dnn"] == "20.0000"
    assert row["gap_cuts"] == "10.0000"
    assert row["closed"] == "50.0000"


def test_solve_row_closed_blank_when_dnn_tight():
    inst = Instance(graph=Graph.complete(4), q=np.ones((6, 6)), ub=9.0)
    row = _solve_row(inst, _result(9.0, 9.0))
    assert row["closed"] == ""
    assert row["gap_dnn"] == "0.0000"


def test_fmt_bound_precision():
    assert _fmt_bound(192.84740881234) == "192.8474088"
    assert _fmt_bound(3.0) == "3"


# ---------------------------------------------------------------- validate

def test_validate_passes(capsys):
    rc = main(["validate"])
    assert rc == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 3
    assert "FAIL" not in out
    assert out.strip().endswith("all checks passed")
